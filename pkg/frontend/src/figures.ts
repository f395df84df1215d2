/**
 * Figure builders: each reads the engine's CSV output and lays one SVG
 * analog of the corresponding plot. No physics is recomputed here; the CSVs
 * are the single source of truth.
 */

import { readdirSync, writeFileSync, mkdirSync } from "node:fs";
import { basename, dirname, join } from "node:path";

import { CsvError, columnsMatching, numberColumn, readCsv, type CsvTable } from "./csv.js";
import { fitLine } from "./fit.js";
import { PALETTE, extent, frame, tickLabel, ticks, type Frame } from "./svg.js";

export const FIGURE_IDS = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  id: FigureId;
  inputs: string[];
  output: string;
}

export interface RenderResult {
  spec: FigureSpec;
  /** the locally refitted slope, fig6 only */
  slope?: number;
  /** the engine's slope read from the fit CSV, fig6 only */
  engineSlope?: number;
}

function listDir(dir: string): string[] {
  try {
    return readdirSync(dir).sort();
  } catch {
    throw new CsvError(`${dir}: cannot list input directory`);
  }
}

function findAll(dir: string, test: (name: string) => boolean, what: string): string[] {
  const hits = listDir(dir).filter(test);
  if (hits.length === 0) {
    throw new CsvError(`${dir}: no input matching ${what}`);
  }
  return hits.map((name) => join(dir, name));
}

/** Map a figure id onto its input files inside the engine's output directory. */
export function resolveInputs(id: FigureId, dir: string): string[] {
  switch (id) {
    case "fig2": {
      const density = findAll(dir, (n) => n.endsWith("_density.csv"), "*_density.csv")[0]!;
      const detectors = density.replace(/_density\.csv$/, "_detectors.csv");
      return listDir(dir).includes(basename(detectors)) ? [density, detectors] : [density];
    }
    case "fig3":
    case "fig4":
      return findAll(
        dir,
        (n) => n.endsWith("_run.csv") && !n.includes("nsweep_run_"),
        "*_run.csv (excluding nsweep runs)",
      );
    case "fig5":
      return findAll(dir, (n) => /nsweep_run_N\d+\.csv$/.test(n), "*nsweep_run_N<k>.csv").sort(
        (a, b) => nOf(a) - nOf(b),
      );
    case "fig6": {
      const points = findAll(dir, (n) => n.endsWith("nsweep.csv"), "*nsweep.csv")[0]!;
      const fit = findAll(dir, (n) => n.endsWith("nsweep_fit.csv"), "*nsweep_fit.csv")[0]!;
      return [points, fit];
    }
    case "fig7":
      return findAll(dir, (n) => /report_n\d+\.csv$/.test(n), "*report_n<k>.csv");
  }
}

const nOf = (path: string): number => {
  const m = /N(\d+)\.csv$/.exec(path);
  return m ? Number(m[1]) : 0;
};

function legend(f: Frame, entries: Array<[string, string]>): void {
  const x0 = f.x.range[1] - 8;
  entries.forEach(([label, color], i) => {
    const y = f.y.range[1] + 12 + 14 * i;
    f.canvas.line(x0 - 26, y - 3, x0 - 6, y - 3, color, 2.5);
    f.canvas.text(x0 - 30, y, label, "end", 10);
  });
}

/** A second ruler above the plot translating steps into evolution time. */
function timeTwinAxis(f: Frame, dt: number): void {
  const [x0, x1] = f.x.range;
  const yTop = f.y.range[1];
  f.canvas.line(x0, yTop, x1, yTop, "black");
  for (const s of ticks(f.x.domain[0], f.x.domain[1])) {
    const px = f.x(s);
    f.canvas.line(px, yTop, px, yTop - 4, "black");
    f.canvas.text(px, yTop - 7, tickLabel(s * dt), "middle", 9);
  }
  f.canvas.text((x0 + x1) / 2, yTop - 20, "t (inverse-mass units)", "middle", 9);
}

function detectorBars(
  f: Frame,
  spans: Array<[number, number]>,
  yFraction: number,
  colors?: string[],
): void {
  spans.forEach(([lo, hi], i) => {
    const y = f.y.range[1] + (f.y.range[0] - f.y.range[1]) * yFraction;
    f.canvas.line(f.x(lo), y, f.x(hi), y, colors?.[i % 10] ?? PALETTE[i % 10]!, 5);
  });
}

function dtOfRun(table: CsvTable): number {
  const steps = numberColumn(table, "step");
  const t = numberColumn(table, "t");
  const last = steps.length - 1;
  return steps[last]! > 0 ? t[last]! / steps[last]! : 0.0025;
}

// -- individual figures ------------------------------------------------------

function buildFig2(inputs: string[]): Frame {
  const table = readCsv(inputs[0]!);
  const x = numberColumn(table, "x");
  const snapshots = columnsMatching(table, "rho_step_");
  if (snapshots.length === 0) {
    throw new CsvError(`${table.path}: missing column 'rho_step_*'`);
  }
  const all: number[] = [];
  const series = snapshots.map((name) => {
    const values = numberColumn(table, name);
    all.push(...values);
    return { name, values };
  });
  const f = frame(640, 420, extent(x, 0.02), [0, extent(all)[1]],
    "x", "probability density", "density snapshots during collapse");
  series.forEach((s, i) => {
    f.canvas.polyline(x.map((xi, j) => [f.x(xi), f.y(Math.max(s.values[j]!, 0))]),
      PALETTE[i % 10]!, 1.5);
  });
  if (inputs.length > 1) {
    const dets = readCsv(inputs[1]!);
    const x0 = numberColumn(dets, "x0");
    const hw = numberColumn(dets, "half_width");
    detectorBars(f, x0.map((c, i) => [c - hw[i]!, c + hw[i]!]), 0.04, ["#1f77b4"]);
  }
  legend(f, series.map((s, i) => [
    `step ${s.name.replace("rho_step_", "")}`, PALETTE[i % 10]!,
  ]));
  return f;
}

function buildRunFamily(inputs: string[], column: "P" | "r"): Frame {
  const tables = inputs.map(readCsv);
  const all: number[] = [];
  const maxStep: number[] = [];
  const series = tables.map((table) => {
    const steps = numberColumn(table, "step");
    const values = column === "r"
      ? numberColumn(table, "r")
      : numberColumn(table, columnsMatching(table, "P_")[0] ?? "P_0");
    all.push(...values);
    maxStep.push(steps[steps.length - 1]!);
    return { label: basename(table.path).replace(/\.csv$/, ""), steps, values, table };
  });
  const yLabel = column === "r" ? "realization r" : "window probability";
  const title = column === "r" ? "realization versus step" : "detector probability versus step";
  const f = frame(640, 420, [0, Math.max(...maxStep)], extent(all),
    "step", yLabel, title, { top: 46, right: 18, bottom: 44, left: 64 });
  series.forEach((s, i) => {
    f.canvas.polyline(s.steps.map((st, j) => [f.x(st), f.y(s.values[j]!)]),
      PALETTE[i % 10]!, 1.5);
  });
  timeTwinAxis(f, dtOfRun(tables[0]!));
  legend(f, series.map((s, i) => [s.label, PALETTE[i % 10]!]));
  return f;
}

function buildFig5(inputs: string[]): Frame {
  const f = buildRunFamily(inputs, "P");
  return f;
}

function buildFig6(inputs: string[]): { frame: Frame; slope: number; engineSlope: number } {
  const points = readCsv(inputs[0]!);
  const fitTable = readCsv(inputs[1]!);
  const n = numberColumn(points, "N");
  const steps = numberColumn(points, "steps");
  const engineSlope = numberColumn(fitTable, "slope")[0]!;
  const engineIntercept = numberColumn(fitTable, "intercept_steps")[0]!;
  const lnN = n.map(Math.log);
  const lnSteps = steps.map(Math.log);
  const local = fitLine(lnN, lnSteps);
  const f = frame(640, 420, extent(lnN, 0.08), extent(lnSteps, 0.15),
    "ln N", "ln collapse steps", "collapse time versus detector size (ln-ln)");
  const [d0, d1] = f.x.domain;
  f.canvas.polyline(
    [d0, d1].map((v) => [f.x(v), f.y(engineSlope * v + engineIntercept)]),
    "#d62728", 1.5, "6 3",
  );
  lnN.forEach((v, i) => f.canvas.circle(f.x(v), f.y(lnSteps[i]!), 4, "black"));
  f.canvas.text(f.x.range[0] + 10, f.y.range[1] + 14,
    `engine fit slope ${engineSlope.toFixed(4)}`, "start", 10);
  f.canvas.text(f.x.range[0] + 10, f.y.range[1] + 28,
    `refit slope ${local.slope.toFixed(4)}`, "start", 10);
  return { frame: f, slope: local.slope, engineSlope };
}

function buildFig7(inputs: string[]): Frame {
  const reports = inputs.map(readCsv);
  const first = reports[0]!;
  const dataRows = (t: CsvTable) => t.rows.filter((row) => row[0] !== "summary");
  const x0 = numberColumn(first, "x0", dataRows(first));
  const baseline = numberColumn(first, "p_n0", dataRows(first));
  const curves = reports.map((t, i) => ({
    label: basename(t.path).replace(/\.csv$/, ""),
    values: numberColumn(t, "p_n", dataRows(t)),
    color: i === 0 ? "black" : PALETTE[0]!,
  }));
  const all = [...baseline, ...curves.flatMap((c) => c.values)];
  const f = frame(640, 420, extent(x0, 0.08), [0, extent(all)[1]],
    "detector center x0", "collapse probability",
    "detector-array probabilities: pilot-wave versus Born");
  const spacing = x0.length > 1 ? (x0[1]! - x0[0]!) / 2 : 1;
  detectorBars(f, x0.map((c) => [c - spacing, c + spacing]), 0.02);
  f.canvas.polyline(x0.map((v, j) => [f.x(v), f.y(baseline[j]!)]), "#2ca02c", 1.5, "6 3");
  x0.forEach((v, j) => f.canvas.circle(f.x(v), f.y(baseline[j]!), 3.5, "#2ca02c"));
  for (const curve of curves) {
    f.canvas.polyline(x0.map((v, j) => [f.x(v), f.y(curve.values[j]!)]),
      curve.color, 1.5, "4 3");
    x0.forEach((v, j) => f.canvas.circle(f.x(v), f.y(curve.values[j]!), 3.5, curve.color));
  }
  legend(f, [
    ...curves.map((c): [string, string] => [c.label, c.color]),
    ["Born baseline p_n0", "#2ca02c"],
  ]);
  return f;
}

// -- dispatch ----------------------------------------------------------------

export function render(spec: FigureSpec): RenderResult {
  let built: Frame;
  const result: RenderResult = { spec };
  switch (spec.id) {
    case "fig2":
      built = buildFig2(spec.inputs);
      break;
    case "fig3":
      built = buildRunFamily(spec.inputs, "P");
      break;
    case "fig4":
      built = buildRunFamily(spec.inputs, "r");
      break;
    case "fig5":
      built = buildFig5(spec.inputs);
      break;
    case "fig6": {
      const out = buildFig6(spec.inputs);
      built = out.frame;
      result.slope = out.slope;
      result.engineSlope = out.engineSlope;
      break;
    }
    case "fig7":
      built = buildFig7(spec.inputs);
      break;
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, built.canvas.render(), "ascii");
  return result;
}

export function renderFigure(id: FigureId, inDir: string, outPath: string): RenderResult {
  return render({ id, inputs: resolveInputs(id, inDir), output: outPath });
}
