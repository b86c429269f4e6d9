/** Linear and logarithmic axis scales with deterministic tick placement. */

export interface Scale {
  kind: "linear" | "log";
  domain: [number, number];
  range: [number, number];
  map(value: number): number;
  ticks(): number[];
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return step * mag;
}

export function linearScale(domain: [number, number],
                            range: [number, number], target = 6): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return {
    kind: "linear",
    domain,
    range,
    map: (v) => r0 + ((v - d0) / span) * (r1 - r0),
    ticks: () => {
      const step = niceStep(span, target);
      const k0 = Math.ceil(d0 / step - 1e-9);
      const k1 = Math.floor(d1 / step + 1e-9);
      const out: number[] = [];
      for (let k = k0; k <= k1; k += 1) {
        // integer multiples, re-rounded to kill accumulation artifacts
        out.push(k === 0 ? 0 : Number((k * step).toPrecision(12)));
      }
      return out;
    },
  };
}

export function logScale(domain: [number, number],
                         range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale requires positive domain, got [${d0}, ${d1}]`);
  }
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  return {
    kind: "log",
    domain,
    range,
    map: (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0),
    ticks: () => {
      const out: number[] = [];
      const lo = Math.floor(l0);
      const hi = Math.ceil(l1);
      for (let e = lo; e <= hi; e += 1) {
        for (const m of span > 3 ? [1] : [1, 2, 5]) {
          const t = m * Math.pow(10, e);
          if (t >= d0 * (1 - 1e-12) && t <= d1 * (1 + 1e-12)) out.push(t);
        }
      }
      return out;
    },
  };
}

/** Domain padded by a small fraction (linear) or factor (log). */
export function padDomain(values: number[], kind: "linear" | "log",
                          frac = 0.06): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v)
    && (kind === "linear" || v > 0));
  if (finite.length === 0) throw new Error("no finite values for axis domain");
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (kind === "log") {
    const f = Math.pow(hi / lo || 10, frac);
    return [lo / f, hi * f];
  }
  const pad = (hi - lo || Math.abs(hi) || 1) * frac;
  return [lo - pad, hi + pad];
}

/** Fixed-precision, locale-free number label. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("+", "");
  }
  return String(Number(v.toPrecision(6)));
}
