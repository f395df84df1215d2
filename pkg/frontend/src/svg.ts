/**
 * Tiny deterministic SVG plotter: linear scales, axes, polylines, dots and
 * horizontal bars. No timestamps or randomness anywhere, so re-rendering
 * unchanged data reproduces the bytes exactly.
 */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error("extent of empty or non-finite data");
  }
  const margin = (hi - lo || Math.abs(hi) || 1) * pad;
  return [lo - margin, hi + margin];
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const unit = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const inc = unit * step;
  const start = Math.ceil(lo / inc) * inc;
  const out: number[] = [];
  for (let v = start; v <= hi + inc * 1e-9; v += inc) {
    out.push(Math.abs(v) < inc * 1e-9 ? 0 : v);
  }
  return out;
}

const fmt = (v: number): string => {
  const rounded = Number(v.toFixed(2));
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

export const tickLabel = (v: number): string => {
  if (v !== 0 && (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return String(Number(v.toPrecision(6)));
};

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export class SvgCanvas {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${fmt(width)}"${d}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5, dash = ""): void {
    const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${stroke}" stroke-width="${fmt(width)}"${d}/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 11, rotate = 0): void {
    const transform = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}" font-family="sans-serif"${transform}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      `</svg>`,
    ].join("\n") + "\n";
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  canvas: SvgCanvas;
  x: Scale;
  y: Scale;
}

/** Axes, tick marks and labels around a plotting region. */
export function frame(
  width: number,
  height: number,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
  margins: Margins = { top: 34, right: 18, bottom: 44, left: 64 },
): Frame {
  const canvas = new SvgCanvas(width, height);
  const x = linearScale(xDomain, [margins.left, width - margins.right]);
  const y = linearScale(yDomain, [height - margins.bottom, margins.top]);
  const [x0, x1] = x.range;
  const [y0, y1] = y.range;

  canvas.text(width / 2, margins.top - 14, title, "middle", 13);
  canvas.line(x0, y0, x1, y0, "black");
  canvas.line(x0, y0, x0, y1, "black");
  for (const t of ticks(xDomain[0], xDomain[1])) {
    const px = x(t);
    canvas.line(px, y0, px, y0 + 4, "black");
    canvas.text(px, y0 + 16, tickLabel(t));
  }
  for (const t of ticks(yDomain[0], yDomain[1])) {
    const py = y(t);
    canvas.line(x0 - 4, py, x0, py, "black");
    canvas.text(x0 - 8, py + 3, tickLabel(t), "end");
  }
  canvas.text((x0 + x1) / 2, height - 8, xLabel);
  canvas.text(16, (y0 + y1) / 2, yLabel, "middle", 11, -90);
  return { canvas, x, y };
}

export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
