/** Reader for the harness's self-describing field snapshots.
 *
 * Format: ASCII header lines "eulerpml-snapshot 1", "field NAME",
 * "step N", "nx N", "ny N", "dx X", "dy Y", "byte-order little-endian",
 * "dtype float64", "data", then nx*ny little-endian float64 values in
 * C order (the second index varies fastest).
 */

import { readFileSync, existsSync } from "node:fs";
import { MissingInput, SchemaMismatch } from "./errors.js";

export const SNAPSHOT_MAGIC = "eulerpml-snapshot 1";

export interface Snapshot {
  field: string;
  step: number;
  nx: number;
  ny: number;
  dx: number;
  dy: number;
  /** row-major nx * ny values */
  data: Float64Array;
}

export function readSnapshot(path: string): Snapshot {
  if (!existsSync(path)) throw new MissingInput(path);
  const raw = readFileSync(path);
  const marker = Buffer.from("data\n", "ascii");
  const markerAt = raw.indexOf(marker);
  if (markerAt < 0) throw new SchemaMismatch(path, "no data marker");
  const header = raw.subarray(0, markerAt).toString("ascii").split("\n");
  if (header[0] !== SNAPSHOT_MAGIC) {
    throw new SchemaMismatch(path, `bad magic line "${header[0]}"`);
  }
  const meta = new Map<string, string>();
  for (const line of header.slice(1)) {
    if (line.length === 0) continue;
    const at = line.indexOf(" ");
    meta.set(line.slice(0, at), line.slice(at + 1));
  }
  if (meta.get("byte-order") !== "little-endian" || meta.get("dtype") !== "float64") {
    throw new SchemaMismatch(path, "expected little-endian float64 payload");
  }
  const nx = Number(meta.get("nx"));
  const ny = Number(meta.get("ny"));
  const payload = raw.subarray(markerAt + marker.length);
  if (payload.length < nx * ny * 8) {
    throw new SchemaMismatch(path, `payload holds ${payload.length} bytes, expected ${nx * ny * 8}`);
  }
  const view = new DataView(payload.buffer, payload.byteOffset, nx * ny * 8);
  const data = new Float64Array(nx * ny);
  for (let i = 0; i < nx * ny; i++) data[i] = view.getFloat64(i * 8, true);
  return {
    field: meta.get("field") ?? "",
    step: Number(meta.get("step")),
    nx,
    ny,
    dx: Number(meta.get("dx")),
    dy: Number(meta.get("dy")),
    data,
  };
}
