/** Renderers: one vector (SVG) output per figure job, plain text per
 * table job. Output bytes depend only on the input files, so re-running
 * a job overwrites its output byte-stably.
 */

import { writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";
import { readProbeCsv, readSweepCsv, type ProbeSeries } from "./csv.js";
import { readSnapshot, type Snapshot } from "./snapshot.js";
import { SchemaMismatch } from "./errors.js";
import type { PlotJob } from "./job.js";

const W = 720;
const H = 480;
const MARGIN = { left: 72, right: 16, top: 24, bottom: 48 };

/** Fixed-precision, locale-free number for SVG attributes. */
function fmt(x: number): string {
  if (x === 0) return "0";
  const s = x.toPrecision(8);
  return s.includes("e") ? s : s.replace(/\.?0+$/, "");
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (lo === hi) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / (n * step);
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / s) * s; t <= hi + 1e-12 * span; t += s) ticks.push(t);
  return ticks;
}

function polyline(xs: number[], ys: number[], style: string): string {
  const pts = xs.map((x, i) => `${fmt(x)},${fmt(ys[i])}`).join(" ");
  return `<polyline fill="none" ${style} points="${pts}"/>`;
}

function svgDocument(body: string[], width = W, height = H): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

function pickColumn(series: ProbeSeries, column: string | undefined, path: string): string {
  const col = column ?? series.columns[0];
  if (!series.series.has(col)) {
    throw new SchemaMismatch(path, `no probe column "${col}" (have ${series.columns.join(", ")})`);
  }
  return col;
}

export function renderProbeOverlay(
  pmlPath: string,
  refPath: string,
  column: string | undefined,
): string {
  const pml = readProbeCsv(pmlPath);
  const ref = readProbeCsv(refPath);
  const col = pickColumn(pml, column, pmlPath);
  pickColumn(ref, col, refPath);
  const a = pml.series.get(col)!;
  const b = ref.series.get(col)!;
  if (a.length !== b.length) {
    throw new SchemaMismatch(pmlPath, `series length ${a.length} differs from reference ${b.length}`);
  }
  const t = pml.times;
  const lo = Math.min(...a, ...b);
  const hi = Math.max(...a, ...b);
  const pad = lo === hi ? 1 : 0.05 * (hi - lo);
  const y0 = lo - pad;
  const y1 = hi + pad;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - t[0]) / (t[t.length - 1] - t[0])) * plotW;
  const sy = (y: number) => MARGIN.top + (1 - (y - y0) / (y1 - y0)) * plotH;
  const maxGap = a.reduce((m, v, i) => Math.max(m, Math.abs(v - b[i])), 0);

  const body: string[] = [`<!-- max-gap ${maxGap.toExponential(12)} -->`];
  body.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="black"/>`,
  );
  for (const tick of niceTicks(y0, y1)) {
    const y = fmt(sy(tick));
    body.push(`<line x1="${MARGIN.left - 4}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="black"/>`);
    body.push(
      `<text x="${MARGIN.left - 8}" y="${y}" font-family="monospace" font-size="11" text-anchor="end" dominant-baseline="middle">${tick.toExponential(2)}</text>`,
    );
  }
  for (const tick of niceTicks(t[0], t[t.length - 1])) {
    const x = fmt(sx(tick));
    const yb = MARGIN.top + plotH;
    body.push(`<line x1="${x}" y1="${yb}" x2="${x}" y2="${yb + 4}" stroke="black"/>`);
    body.push(
      `<text x="${x}" y="${yb + 18}" font-family="monospace" font-size="11" text-anchor="middle">${tick.toExponential(2)}</text>`,
    );
  }
  body.push(polyline(t.map(sx), b.map(sy), 'stroke="black" stroke-width="1.5"'));
  body.push(polyline(t.map(sx), a.map(sy), 'stroke="crimson" stroke-width="1.5" stroke-dasharray="6 4"'));
  body.push(
    `<text x="${MARGIN.left + 8}" y="${MARGIN.top + 16}" font-family="monospace" font-size="12">reference (solid), layered (dashed), probe ${col}, max gap ${maxGap.toExponential(3)}</text>`,
  );
  body.push(
    `<text x="${W / 2}" y="${H - 8}" font-family="monospace" font-size="12" text-anchor="middle">t (s)</text>`,
  );
  return svgDocument(body);
}

/** Symmetric blue-white-red map on [-1, 1]. */
function heatColor(v: number): string {
  const clamp = Math.max(-1, Math.min(1, v));
  const channel = (x: number) => Math.round(255 * Math.max(0, Math.min(1, x)));
  const r = channel(1 + Math.min(0, clamp) * 0.85);
  const g = channel(1 - Math.abs(clamp) * 0.85);
  const b = channel(1 - Math.max(0, clamp) * 0.85);
  const hex = (x: number) => x.toString(16).padStart(2, "0");
  return `#${hex(r)}${hex(g)}${hex(b)}`;
}

export function renderSnapshotGrid(paths: string[], columns?: number): string {
  const snaps: Snapshot[] = paths.map(readSnapshot);
  const nx = snaps[0].nx;
  const ny = snaps[0].ny;
  for (const s of snaps) {
    if (s.nx !== nx || s.ny !== ny) {
      throw new SchemaMismatch(paths[snaps.indexOf(s)], "snapshot shapes differ across panels");
    }
  }
  let scale = 0;
  for (const s of snaps) for (const v of s.data) scale = Math.max(scale, Math.abs(v));
  if (scale === 0) scale = 1;

  const cols = columns ?? Math.ceil(Math.sqrt(snaps.length));
  const rows = Math.ceil(snaps.length / cols);
  const cell = Math.max(2, Math.floor(240 / Math.max(nx, ny)));
  const panelW = ny * cell;
  const panelH = nx * cell;
  const gap = 28;
  const width = cols * panelW + (cols + 1) * gap;
  const height = rows * (panelH + gap) + gap;

  const body: string[] = [`<!-- shared scale ${scale.toExponential(12)} -->`];
  snaps.forEach((snap, idx) => {
    const px = gap + (idx % cols) * (panelW + gap);
    const py = gap + Math.floor(idx / cols) * (panelH + gap);
    body.push(`<g transform="translate(${px},${py})">`);
    for (let i = 0; i < nx; i++) {
      for (let j = 0; j < ny; j++) {
        const color = heatColor(snap.data[i * ny + j] / scale);
        if (color === "#ffffff") continue;
        body.push(
          `<rect x="${j * cell}" y="${(nx - 1 - i) * cell}" width="${cell}" height="${cell}" fill="${color}"/>`,
        );
      }
    }
    body.push(`<rect width="${panelW}" height="${panelH}" fill="none" stroke="black"/>`);
    body.push(
      `<text x="0" y="${panelH + 14}" font-family="monospace" font-size="11">${snap.field}, step ${snap.step}</text>`,
    );
    body.push("</g>");
  });
  return svgDocument(body, width, height);
}

/** Plain-text table: rows p/u/v/vorticity, one column per sweep cell.
 * Cell values are the CSV strings verbatim.
 */
export function renderTable(sweepPath: string): string {
  const sweep = readSweepCsv(sweepPath);
  const fields = ["p_error", "u_error", "v_error", "vorticity_error", "status"];
  const index = new Map(sweep.columns.map((c, i) => [c, i]));
  const header = ["quantity", ...sweep.rows.map(
    (row) => `n_delta=${row[index.get("n_delta")!]} sigma=${row[index.get("sigma_pml")!]}`,
  )];
  const lines: string[][] = [header];
  for (const field of fields) {
    lines.push([field, ...sweep.rows.map((row) => row[index.get(field)!])]);
  }
  const widths = header.map((_, c) => Math.max(...lines.map((row) => row[c].length)));
  const text = lines
    .map((row) => row.map((cell, c) => cell.padEnd(widths[c])).join("  ").trimEnd())
    .join("\n");
  return `# layer-parameter sweep\n${text}\n`;
}

/** Runs one job and writes its output file. Returns the output path. */
export function render(job: PlotJob): string {
  let content: string;
  switch (job.kind) {
    case "probe-overlay":
      content = renderProbeOverlay(job.pml, job.reference, job.column);
      break;
    case "snapshot-grid":
      content = renderSnapshotGrid(job.snapshots, job.columns);
      break;
    case "table":
      content = renderTable(job.sweep);
      break;
  }
  mkdirSync(dirname(job.output), { recursive: true });
  writeFileSync(job.output, content, "utf8");
  return job.output;
}
