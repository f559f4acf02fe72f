/** Plot job descriptions: a JSON file validated against a zod schema. */

import { readFileSync, existsSync } from "node:fs";
import { z } from "zod";
import { MissingInput, SchemaMismatch } from "./errors.js";

const probeOverlay = z.object({
  kind: z.literal("probe-overlay"),
  /** truncated-run probe CSV */
  pml: z.string(),
  /** enlarged-domain reference probe CSV */
  reference: z.string(),
  /** probe column to draw, e.g. "p0"; defaults to the first column */
  column: z.string().optional(),
  output: z.string(),
});

const snapshotGrid = z.object({
  kind: z.literal("snapshot-grid"),
  /** snapshot files, drawn left to right, top to bottom */
  snapshots: z.array(z.string()).min(1),
  /** panels per row; defaults to ceil(sqrt(n)) */
  columns: z.number().int().positive().optional(),
  output: z.string(),
});

const table = z.object({
  kind: z.literal("table"),
  /** table1 sweep CSV */
  sweep: z.string(),
  output: z.string(),
});

export const plotJobSchema = z.discriminatedUnion("kind", [
  probeOverlay,
  snapshotGrid,
  table,
]);

export type PlotJob = z.infer<typeof plotJobSchema>;

export function loadJob(path: string): PlotJob {
  if (!existsSync(path)) throw new MissingInput(path);
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaMismatch(path, `not valid JSON: ${(err as Error).message}`);
  }
  const result = plotJobSchema.safeParse(parsed);
  if (!result.success) {
    throw new SchemaMismatch(path, result.error.issues[0].message);
  }
  return result.data;
}
