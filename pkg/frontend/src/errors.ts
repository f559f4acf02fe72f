/** Shared error types for the plot renderer. */

export class MissingInput extends Error {
  constructor(path: string) {
    super(`missing input file: ${path}`);
    this.name = "MissingInput";
  }
}

export class SchemaMismatch extends Error {
  constructor(path: string, detail: string) {
    super(`schema mismatch in ${path}: ${detail}`);
    this.name = "SchemaMismatch";
  }
}
