#!/usr/bin/env node
/** Command line entry: eulerpml-plots JOB.json [JOB2.json ...]
 *
 * Each argument is a JSON job description (see job.ts). Exit code 2 on
 * missing inputs or schema mismatches.
 */

import { loadJob } from "./job.js";
import { render } from "./render.js";
import { MissingInput, SchemaMismatch } from "./errors.js";

export function main(argv: string[]): number {
  if (argv.length === 0) {
    process.stderr.write("usage: eulerpml-plots JOB.json [JOB2.json ...]\n");
    return 2;
  }
  for (const path of argv) {
    try {
      const out = render(loadJob(path));
      process.stderr.write(`${path} -> ${out}\n`);
    } catch (err) {
      if (err instanceof MissingInput || err instanceof SchemaMismatch) {
        process.stderr.write(`error: ${err.name}: ${err.message}\n`);
        return 2;
      }
      throw err;
    }
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
