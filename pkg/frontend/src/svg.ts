/** Minimal deterministic SVG assembly: axes, line paths, markers, legend. */

import { Scale, fmt } from "./scale.js";

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];

export type MarkerShape = "circle" | "square" | "triangle" | "diamond" | "cross";
export const MARKERS: MarkerShape[] = ["circle", "square", "triangle", "diamond", "cross"];

const P = (v: number) => String(Number(v.toFixed(2)));

export interface Panel {
  x: Scale;
  y: Scale;
  left: number;
  top: number;
  width: number;
  height: number;
  parts: string[];
}

export function makePanel(x: Scale, y: Scale, left: number, top: number,
                          width: number, height: number): Panel {
  return { x, y, left, top, width, height, parts: [] };
}

export function axes(panel: Panel, xLabel: string, yLabel: string): void {
  const { x, y, left, top, width, height, parts } = panel;
  const bottom = top + height;
  const right = left + width;
  parts.push(`<rect x="${P(left)}" y="${P(top)}" width="${P(width)}" height="${P(height)}" fill="none" stroke="#333" stroke-width="1"/>`);
  for (const t of x.ticks()) {
    const px = x.map(t);
    parts.push(`<line x1="${P(px)}" y1="${P(bottom)}" x2="${P(px)}" y2="${P(bottom + 4)}" stroke="#333" stroke-width="1"/>`);
    parts.push(`<line x1="${P(px)}" y1="${P(top)}" x2="${P(px)}" y2="${P(bottom)}" stroke="#ddd" stroke-width="0.5"/>`);
    parts.push(`<text x="${P(px)}" y="${P(bottom + 16)}" font-size="11" text-anchor="middle" fill="#111">${fmt(t)}</text>`);
  }
  for (const t of y.ticks()) {
    const py = y.map(t);
    parts.push(`<line x1="${P(left - 4)}" y1="${P(py)}" x2="${P(left)}" y2="${P(py)}" stroke="#333" stroke-width="1"/>`);
    parts.push(`<line x1="${P(left)}" y1="${P(py)}" x2="${P(right)}" y2="${P(py)}" stroke="#ddd" stroke-width="0.5"/>`);
    parts.push(`<text x="${P(left - 7)}" y="${P(py + 3.5)}" font-size="11" text-anchor="end" fill="#111">${fmt(t)}</text>`);
  }
  parts.push(`<text x="${P(left + width / 2)}" y="${P(bottom + 34)}" font-size="13" text-anchor="middle" fill="#111">${xLabel}</text>`);
  parts.push(`<text x="${P(left - 46)}" y="${P(top + height / 2)}" font-size="13" text-anchor="middle" fill="#111" transform="rotate(-90 ${P(left - 46)} ${P(top + height / 2)})">${yLabel}</text>`);
}

/** Connected line through finite points, clipped to the panel domain. */
export function linePath(panel: Panel, xs: number[], ys: number[],
                         color: string, dashed = false): void {
  const cmds: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i += 1) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])
        || (panel.y.kind === "log" && ys[i] <= 0)
        || (panel.x.kind === "log" && xs[i] <= 0)) {
      pen = false;
      continue;
    }
    const px = panel.x.map(xs[i]);
    const py = panel.y.map(ys[i]);
    cmds.push(`${pen ? "L" : "M"}${P(px)} ${P(py)}`);
    pen = true;
  }
  if (cmds.length === 0) return;
  const dash = dashed ? ' stroke-dasharray="6 4"' : "";
  panel.parts.push(`<path d="${cmds.join(" ")}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`);
}

export function marker(panel: Panel, xv: number, yv: number, color: string,
                       shape: MarkerShape, size = 4): void {
  if (!Number.isFinite(xv) || !Number.isFinite(yv)) return;
  if (panel.y.kind === "log" && yv <= 0) return;
  if (panel.x.kind === "log" && xv <= 0) return;
  const x = panel.x.map(xv);
  const y = panel.y.map(yv);
  const s = size;
  const { parts } = panel;
  switch (shape) {
    case "circle":
      parts.push(`<circle cx="${P(x)}" cy="${P(y)}" r="${P(s)}" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "square":
      parts.push(`<rect x="${P(x - s)}" y="${P(y - s)}" width="${P(2 * s)}" height="${P(2 * s)}" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "triangle":
      parts.push(`<path d="M${P(x)} ${P(y - s)} L${P(x + s)} ${P(y + s)} L${P(x - s)} ${P(y + s)} Z" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "diamond":
      parts.push(`<path d="M${P(x)} ${P(y - s)} L${P(x + s)} ${P(y)} L${P(x)} ${P(y + s)} L${P(x - s)} ${P(y)} Z" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "cross":
      parts.push(`<path d="M${P(x - s)} ${P(y - s)} L${P(x + s)} ${P(y + s)} M${P(x - s)} ${P(y + s)} L${P(x + s)} ${P(y - s)}" stroke="${color}" stroke-width="1.4"/>`);
      break;
  }
}

export interface LegendEntry {
  label: string;
  color: string;
  shape?: MarkerShape;
  dashed?: boolean;
}

export function legend(panel: Panel, entries: LegendEntry[]): void {
  const x0 = panel.left + 10;
  let y = panel.top + 14;
  for (const e of entries) {
    if (e.shape) {
      drawGlyphAt(panel, x0 + 9, y - 3, e.color, e.shape);
    } else {
      const dash = e.dashed ? ' stroke-dasharray="6 4"' : "";
      panel.parts.push(`<line x1="${P(x0)}" y1="${P(y - 3)}" x2="${P(x0 + 18)}" y2="${P(y - 3)}" stroke="${e.color}" stroke-width="1.6"${dash}/>`);
    }
    panel.parts.push(`<text x="${P(x0 + 24)}" y="${P(y)}" font-size="11" fill="#111">${e.label}</text>`);
    y += 15;
  }
}

function drawGlyphAt(panel: Panel, x: number, y: number, color: string,
                     shape: MarkerShape): void {
  const s = 4;
  switch (shape) {
    case "circle":
      panel.parts.push(`<circle cx="${P(x)}" cy="${P(y)}" r="${P(s)}" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "square":
      panel.parts.push(`<rect x="${P(x - s)}" y="${P(y - s)}" width="${P(2 * s)}" height="${P(2 * s)}" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "triangle":
      panel.parts.push(`<path d="M${P(x)} ${P(y - s)} L${P(x + s)} ${P(y + s)} L${P(x - s)} ${P(y + s)} Z" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "diamond":
      panel.parts.push(`<path d="M${P(x)} ${P(y - s)} L${P(x + s)} ${P(y)} L${P(x)} ${P(y + s)} L${P(x - s)} ${P(y)} Z" fill="none" stroke="${color}" stroke-width="1.4"/>`);
      break;
    case "cross":
      panel.parts.push(`<path d="M${P(x - s)} ${P(y - s)} L${P(x + s)} ${P(y + s)} M${P(x - s)} ${P(y + s)} L${P(x + s)} ${P(y - s)}" stroke="${color}" stroke-width="1.4"/>`);
      break;
  }
}

export function document(width: number, height: number, title: string,
                         panels: Panel[]): string {
  const body = panels.map((p) => p.parts.join("\n")).join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    `<text x="${P(width / 2)}" y="18" font-size="14" text-anchor="middle" fill="#111">${title}</text>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}
