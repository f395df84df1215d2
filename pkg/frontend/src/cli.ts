/**
 * render --figure <fig2..fig7|all> --in <dir> --out <path>
 *
 * With `all`, --out names a directory and each figure lands in it as
 * <id>.svg. Exit 0 on success, 1 on missing/ill-formed inputs.
 */

import { join } from "node:path";

import { CsvError } from "./csv.js";
import { FIGURE_IDS, renderFigure, type FigureId } from "./figures.js";

interface Args {
  figure: string;
  inDir: string;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${key}`);
    }
    switch (key) {
      case "--figure":
        args.figure = value;
        break;
      case "--in":
        args.inDir = value;
        break;
      case "--out":
        args.out = value;
        break;
      default:
        throw new Error(`unknown argument ${key}`);
    }
  }
  if (!args.figure || !args.inDir || !args.out) {
    throw new Error("usage: render --figure <id|all> --in <dir> --out <path>");
  }
  return args as Args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  const wanted: FigureId[] =
    args.figure === "all"
      ? [...FIGURE_IDS]
      : FIGURE_IDS.includes(args.figure as FigureId)
        ? [args.figure as FigureId]
        : [];
  if (wanted.length === 0) {
    console.error(`error: unknown figure '${args.figure}' (use ${FIGURE_IDS.join(", ")} or all)`);
    return 1;
  }
  for (const id of wanted) {
    const outPath = args.figure === "all" ? join(args.out, `${id}.svg`) : args.out;
    try {
      const result = renderFigure(id, args.inDir, outPath);
      const extra =
        result.slope !== undefined
          ? ` (refit slope ${result.slope.toFixed(4)} vs engine ${result.engineSlope!.toFixed(4)})`
          : "";
      console.log(`${id}: ${result.spec.inputs.length} input(s) -> ${outPath}${extra}`);
    } catch (err) {
      if (err instanceof CsvError || err instanceof Error) {
        console.error(`error rendering ${id}: ${(err as Error).message}`);
        return 1;
      }
      throw err;
    }
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
