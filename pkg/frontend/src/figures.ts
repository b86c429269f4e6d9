/** Figure definitions: which CSV feeds each figure and how series are
 * grouped. Simulation points render as markers, analytical curves as
 * lines, one color+glyph pair per series key. All numbers come from the
 * CSVs; nothing is computed here beyond axis scaling. */

import {
  CDF_SCHEMA, Row, SWEEP_SCHEMA, SchemaError, Table, distinct, num,
  parseCsv, requireColumns,
} from "./csv.js";
import { Scale, linearScale, logScale, padDomain } from "./scale.js";
import {
  LegendEntry, MARKERS, PALETTE, Panel, axes, document as svgDocument,
  legend, linePath, makePanel, marker,
} from "./svg.js";

export const FIGURE_IDS = ["fig4", "fig5", "fig6", "fig7", "fig8", "fig9"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface PlotSpec {
  id: FigureId;
  /** basename of the input CSV inside the input directory */
  input: string;
  title: string;
}

export const SPECS: Record<FigureId, PlotSpec> = {
  fig4: { id: "fig4", input: "fig4_cdf.csv",
          title: "Success-probability CDF: curves vs simulation" },
  fig5: { id: "fig5", input: "fig5_summary.csv",
          title: "Network average AoI vs arrival rate" },
  fig6: { id: "fig6", input: "fig6_summary.csv",
          title: "Network average AoI vs access probability" },
  fig7: { id: "fig7", input: "fig7_summary.csv",
          title: "Network average AoI vs density, by access policy" },
  fig8: { id: "fig8", input: "fig8_summary.csv",
          title: "Peak-AoI outage vs arrival rate" },
  fig9: { id: "fig9", input: "fig9_summary.csv",
          title: "Average AoI vs peak-AoI outage" },
};

const W = 640;
const H = 440;
const M = { left: 70, top: 36, right: 18, bottom: 52 };

function panelScales(xs: number[], ys: number[], xkind: "linear" | "log",
                     ykind: "linear" | "log",
                     box = { left: M.left, top: M.top,
                             width: W - M.left - M.right,
                             height: H - M.top - M.bottom }):
    { x: Scale; y: Scale } {
  const xd = padDomain(xs, xkind);
  const yd = padDomain(ys, ykind);
  const mk = (kind: "linear" | "log", d: [number, number],
              r: [number, number]) =>
    kind === "log" ? logScale(d, r) : linearScale(d, r);
  return {
    x: mk(xkind, xd, [box.left, box.left + box.width]),
    y: mk(ykind, yd, [box.top + box.height, box.top]),
  };
}

function finite(rows: Row[], col: string): number[] {
  return rows.map((r) => num(r, col)).filter((v) => Number.isFinite(v));
}

/** Sweep-style figure: x column vs (analysis line + sim markers), grouped. */
function renderSweep(table: Table, opts: {
  title: string; xCol: string; groupCol: string;
  anaCol: string; simCol: string; xKind: "linear" | "log";
  yKind: "linear" | "log"; xLabel: string; yLabel: string;
  groupLabel: (v: string) => string;
}): string {
  requireColumns(table, SWEEP_SCHEMA,
                 [opts.xCol, opts.groupCol, opts.anaCol, opts.simCol]);
  const rows = table.rows;
  const xs = finite(rows, opts.xCol);
  const ys = finite(rows, opts.anaCol).concat(finite(rows, opts.simCol));
  if (ys.length === 0) {
    throw new SchemaError(
      `no finite values in ${opts.anaCol}/${opts.simCol}`);
  }
  const { x, y } = panelScales(xs, ys, opts.xKind, opts.yKind);
  const panel = makePanel(x, y, M.left, M.top, W - M.left - M.right,
                          H - M.top - M.bottom);
  axes(panel, opts.xLabel, opts.yLabel);
  const groups = distinct(rows, opts.groupCol);
  const entries: LegendEntry[] = [];
  groups.forEach((g, gi) => {
    const color = PALETTE[gi % PALETTE.length];
    const shape = MARKERS[gi % MARKERS.length];
    const sub = rows.filter((r) => r[opts.groupCol] === g)
      .slice()
      .sort((a, b) => num(a, opts.xCol) - num(b, opts.xCol));
    linePath(panel, sub.map((r) => num(r, opts.xCol)),
             sub.map((r) => num(r, opts.anaCol)), color);
    for (const r of sub) {
      marker(panel, num(r, opts.xCol), num(r, opts.simCol), color, shape);
    }
    entries.push({ label: `${opts.groupLabel(g)} (analysis)`, color });
    entries.push({ label: `${opts.groupLabel(g)} (sim)`, color, shape });
  });
  legend(panel, entries);
  return svgDocument(W, H, opts.title, [panel]);
}

function renderFig4(table: Table, title: string): string {
  requireColumns(table, CDF_SCHEMA, ["xi", "u", "f_beta", "f_exact", "f_emp"]);
  const rows = table.rows;
  const { x, y } = panelScales([0, 1], [0, 1], "linear", "linear");
  const panel = makePanel(x, y, M.left, M.top, W - M.left - M.right,
                          H - M.top - M.bottom);
  axes(panel, "success probability u", "CDF F(u)");
  const entries: LegendEntry[] = [];
  distinct(rows, "xi").forEach((xi, gi) => {
    const color = PALETTE[gi % PALETTE.length];
    const shape = MARKERS[gi % MARKERS.length];
    const sub = rows.filter((r) => r.xi === xi)
      .slice().sort((a, b) => num(a, "u") - num(b, "u"));
    const us = sub.map((r) => num(r, "u"));
    linePath(panel, us, sub.map((r) => num(r, "f_beta")), color);
    const exact = sub.map((r) => num(r, "f_exact"));
    if (exact.some((v) => Number.isFinite(v))) {
      linePath(panel, us, exact, color, true);
    }
    sub.filter((_r, i) => i % 20 === 0).forEach((r) => {
      marker(panel, num(r, "u"), num(r, "f_emp"), color, shape);
    });
    entries.push({ label: `xi=${xi} beta fit`, color });
    entries.push({ label: `xi=${xi} exact`, color, dashed: true });
    entries.push({ label: `xi=${xi} simulation`, color, shape });
  });
  legend(panel, entries);
  return svgDocument(W, H, title, [panel]);
}

function renderFig7(table: Table, title: string): string {
  requireColumns(table, SWEEP_SCHEMA, ["lam", "policy", "sim_avg_aoi"]);
  const rows = table.rows.filter((r) => r.policy !== "");
  const xs = finite(rows, "lam");
  const ys = finite(rows, "sim_avg_aoi");
  if (ys.length === 0) throw new SchemaError("no finite sim_avg_aoi values");
  const { x, y } = panelScales(xs, ys, "log", "log");
  const panel = makePanel(x, y, M.left, M.top, W - M.left - M.right,
                          H - M.top - M.bottom);
  axes(panel, "deployment density (per m^2)", "network average AoI (slots)");
  const entries: LegendEntry[] = [];
  distinct(rows, "policy").forEach((policy, gi) => {
    const color = PALETTE[gi % PALETTE.length];
    const shape = MARKERS[gi % MARKERS.length];
    const sub = rows.filter((r) => r.policy === policy)
      .slice().sort((a, b) => num(a, "lam") - num(b, "lam"));
    linePath(panel, sub.map((r) => num(r, "lam")),
             sub.map((r) => num(r, "sim_avg_aoi")), color);
    for (const r of sub) {
      marker(panel, num(r, "lam"), num(r, "sim_avg_aoi"), color, shape);
    }
    entries.push({ label: policy, color, shape });
  });
  legend(panel, entries);
  return svgDocument(W, H, title, [panel]);
}

function renderFig9(table: Table, title: string): string {
  requireColumns(table, SWEEP_SCHEMA,
                 ["lam", "xi", "ana_avg_aoi", "ana_peak_outage",
                  "sim_avg_aoi", "sim_peak_outage", "p"]);
  const lams = distinct(table.rows, "lam");
  const panels: Panel[] = [];
  const width = 2 * W * 0.55 + M.left + M.right;
  const panelW = W * 0.55 - 20;
  lams.slice(0, 2).forEach((lam, pi) => {
    const rows = table.rows.filter((r) => r.lam === lam);
    const xs = finite(rows, "ana_peak_outage").concat(finite(rows, "sim_peak_outage"));
    const ys = finite(rows, "ana_avg_aoi").concat(finite(rows, "sim_avg_aoi"));
    if (xs.length === 0 || ys.length === 0) {
      throw new SchemaError(`no finite outage/AoI pairs for lam=${lam}`);
    }
    const left = M.left + pi * (panelW + 50);
    const box = { left, top: M.top, width: panelW,
                  height: H - M.top - M.bottom };
    const { x, y } = panelScales(xs, ys, "linear", "linear", box);
    const panel = makePanel(x, y, left, M.top, panelW, H - M.top - M.bottom);
    axes(panel, `peak-AoI outage (lam=${lam})`, pi === 0 ? "network average AoI" : "");
    const entries: LegendEntry[] = [];
    distinct(rows, "xi").forEach((xi, gi) => {
      const color = PALETTE[gi % PALETTE.length];
      const shape = MARKERS[gi % MARKERS.length];
      const sub = rows.filter((r) => r.xi === xi)
        .slice().sort((a, b) => num(a, "p") - num(b, "p"));
      linePath(panel, sub.map((r) => num(r, "ana_peak_outage")),
               sub.map((r) => num(r, "ana_avg_aoi")), color);
      for (const r of sub) {
        marker(panel, num(r, "sim_peak_outage"), num(r, "sim_avg_aoi"),
               color, shape);
      }
      entries.push({ label: `xi=${xi}`, color, shape });
    });
    legend(panel, entries);
    panels.push(panel);
  });
  return svgDocument(width, H, title, panels);
}

export function renderFigure(id: FigureId, csvText: string): string {
  const spec = SPECS[id];
  const table = parseCsv(csvText);
  switch (id) {
    case "fig4":
      return renderFig4(table, spec.title);
    case "fig5":
      return renderSweep(table, {
        title: spec.title, xCol: "xi", groupCol: "lam",
        anaCol: "ana_avg_aoi", simCol: "sim_avg_aoi",
        xKind: "linear", yKind: "log",
        xLabel: "packet arrival rate", yLabel: "network average AoI (slots)",
        groupLabel: (v) => `lam=${v}`,
      });
    case "fig6":
      return renderSweep(table, {
        title: spec.title, xCol: "p", groupCol: "xi",
        anaCol: "ana_avg_aoi", simCol: "sim_avg_aoi",
        xKind: "linear", yKind: "log",
        xLabel: "channel access probability", yLabel: "network average AoI (slots)",
        groupLabel: (v) => `xi=${v}`,
      });
    case "fig7":
      return renderFig7(table, spec.title);
    case "fig8":
      return renderSweep(table, {
        title: spec.title, xCol: "xi", groupCol: "r",
        anaCol: "ana_peak_outage", simCol: "sim_peak_outage",
        xKind: "linear", yKind: "linear",
        xLabel: "packet arrival rate", yLabel: "peak-AoI outage probability",
        groupLabel: (v) => `r=${v}`,
      });
    case "fig9":
      return renderFig9(table, spec.title);
  }
}
