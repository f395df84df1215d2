/**
 * Strict reader for the simulator's CSV files.
 *
 * The engine's output is plain comma-separated ASCII with a single header
 * row and no quoting, so parsing is a straight split. Every failure names
 * the offending file (and column where it has one) so the CLI can surface
 * it directly.
 */

import { readFileSync } from "node:fs";

export class CsvError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CsvError";
  }
}

export interface CsvTable {
  path: string;
  header: string[];
  rows: string[][];
}

export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "ascii");
  } catch {
    throw new CsvError(`${path}: cannot read file`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${path}: file is empty`);
  }
  const header = lines[0]!.split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new CsvError(
        `${path}: row ${i + 2} has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { path, header, rows };
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`${table.path}: missing column '${name}'`);
  }
  return idx;
}

/** Numeric column by name; `rows` defaults to all of them. */
export function numberColumn(
  table: CsvTable,
  name: string,
  rows?: string[][],
): number[] {
  const idx = columnIndex(table, name);
  return (rows ?? table.rows).map((row, i) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new CsvError(
        `${table.path}: column '${name}' row ${i + 2} is not a number: '${row[idx]}'`,
      );
    }
    return value;
  });
}

export function columnsMatching(table: CsvTable, prefix: string): string[] {
  return table.header.filter((name) => name.startsWith(prefix));
}
