/** Readers for the harness CSV outputs.
 *
 * Every harness CSV starts with a one-line "#" schema comment followed by
 * a column-name header row. Readers check both before accepting data.
 */

import { readFileSync, existsSync } from "node:fs";
import Papa from "papaparse";
import { MissingInput, SchemaMismatch } from "./errors.js";

export interface ProbeSeries {
  /** probe column labels without the step/t prefix, e.g. p0, u0, ... */
  columns: string[];
  steps: number[];
  times: number[];
  /** one numeric series per probe column, keyed by label */
  series: Map<string, number[]>;
  comment: string;
}

export interface SweepTable {
  /** column names from the header row */
  columns: string[];
  /** raw cell strings, preserved verbatim for table rendering */
  rows: string[][];
  comment: string;
}

function readLines(path: string, schemaPrefix: string): {
  comment: string;
  header: string[];
  rows: string[][];
} {
  if (!existsSync(path)) throw new MissingInput(path);
  const text = readFileSync(path, "ascii");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2 || !lines[0].startsWith(schemaPrefix)) {
    throw new SchemaMismatch(path, `expected a "${schemaPrefix}" comment line`);
  }
  const parsed = Papa.parse<string[]>(lines.slice(1).join("\n"), {
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaMismatch(path, parsed.errors[0].message);
  }
  const [header, ...rows] = parsed.data;
  return { comment: lines[0], header, rows };
}

export function readProbeCsv(path: string): ProbeSeries {
  const { comment, header, rows } = readLines(path, "# probe series");
  if (header[0] !== "step" || header[1] !== "t") {
    throw new SchemaMismatch(path, "header must start with step,t");
  }
  const columns = header.slice(2);
  if (columns.length === 0 || columns.length % 4 !== 0) {
    throw new SchemaMismatch(path, "expected p,u,v,w quadruples per probe");
  }
  const steps: number[] = [];
  const times: number[] = [];
  const series = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaMismatch(path, `row has ${row.length} fields, expected ${header.length}`);
    }
    const values = row.map(Number);
    if (values.some((v) => Number.isNaN(v))) {
      throw new SchemaMismatch(path, `non-numeric value in row "${row.join(",")}"`);
    }
    steps.push(values[0]);
    times.push(values[1]);
    columns.forEach((c, i) => series.get(c)!.push(values[i + 2]));
  }
  return { columns, steps, times, series, comment };
}

const SWEEP_COLUMNS = [
  "n_delta",
  "sigma_pml",
  "p_error",
  "u_error",
  "v_error",
  "vorticity_error",
  "status",
];

export function readSweepCsv(path: string): SweepTable {
  const { comment, header, rows } = readLines(path, "# table1 sweep");
  if (header.join(",") !== SWEEP_COLUMNS.join(",")) {
    throw new SchemaMismatch(path, `header is "${header.join(",")}"`);
  }
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaMismatch(path, `row has ${row.length} fields, expected ${header.length}`);
    }
  }
  return { columns: header, rows, comment };
}
