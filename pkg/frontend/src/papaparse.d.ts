/** Minimal typing for the papaparse subset used here. */
declare module "papaparse" {
  export interface ParseError {
    message: string;
    row?: number;
  }
  export interface ParseResult<T> {
    data: T[];
    errors: ParseError[];
  }
  export interface ParseConfig {
    skipEmptyLines?: boolean;
  }
  function parse<T>(input: string, config?: ParseConfig): ParseResult<T>;
  const Papa: { parse: typeof parse };
  export default Papa;
}
