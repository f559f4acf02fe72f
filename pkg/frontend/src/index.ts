export { MissingInput, SchemaMismatch } from "./errors.js";
export { readProbeCsv, readSweepCsv } from "./csv.js";
export type { ProbeSeries, SweepTable } from "./csv.js";
export { readSnapshot, SNAPSHOT_MAGIC } from "./snapshot.js";
export type { Snapshot } from "./snapshot.js";
export { plotJobSchema, loadJob } from "./job.js";
export type { PlotJob } from "./job.js";
export {
  render,
  renderProbeOverlay,
  renderSnapshotGrid,
  renderTable,
} from "./render.js";
