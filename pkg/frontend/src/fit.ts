/** Ordinary least squares on ln-ln axes, for the collapse-time overlay. */

export interface LineFit {
  slope: number;
  intercept: number;
}

export function fitLine(x: number[], y: number[]): LineFit {
  if (x.length !== y.length || x.length < 2) {
    throw new Error(`need at least 2 paired points, got ${x.length}/${y.length}`);
  }
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i]! - mx) ** 2;
    sxy += (x[i]! - mx) * (y[i]! - my);
  }
  if (sxx === 0) {
    throw new Error("degenerate fit: all x values identical");
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

export function fitPowerLaw(n: number[], t: number[]): LineFit {
  if (n.some((v) => v <= 0) || t.some((v) => v <= 0)) {
    throw new Error("power-law fit needs strictly positive inputs");
  }
  return fitLine(n.map(Math.log), t.map(Math.log));
}
