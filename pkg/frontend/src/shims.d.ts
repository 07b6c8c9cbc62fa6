// Minimal declarations for runtime dependencies that ship without types
// in this environment.

declare module "papaparse" {
  export interface ParseError {
    message: string;
  }
  export interface ParseMeta {
    fields?: string[];
  }
  export interface ParseResult<T> {
    data: T[];
    errors: ParseError[];
    meta: ParseMeta;
  }
  export interface ParseConfig {
    header?: boolean;
    skipEmptyLines?: boolean;
  }
  function parse<T>(input: string, config?: ParseConfig): ParseResult<T>;
  const Papa: { parse: typeof parse };
  export default Papa;
  export { parse };
}

declare module "d3-scale" {
  export interface Scale {
    (value: number): number;
  }
  export function scaleLinear(domain: number[], range: number[]): Scale;
  export function scaleLog(domain: number[], range: number[]): Scale;
}

declare module "d3-scale-chromatic" {
  export function interpolateViridis(t: number): string;
  export function interpolateTurbo(t: number): string;
}

declare module "d3-shape" {
  export interface Line<T> {
    (data: T[]): string | null;
  }
  export function line<T>(
    x: (d: T) => number,
    y: (d: T) => number,
  ): Line<T>;
}

declare module "yargs" {
  interface Argv {
    scriptName(name: string): Argv;
    command(
      cmd: string,
      describe: string,
      builder: (y: Argv) => Argv,
      handler: (argv: any) => void,
    ): Argv;
    positional(name: string, opts: object): Argv;
    option(name: string, opts: object): Argv;
    demandCommand(n: number): Argv;
    strict(): Argv;
    fail(handler: (msg: string, err: Error | undefined) => void): Argv;
    parse(): Promise<unknown>;
  }
  function yargs(args: string[]): Argv;
  export default yargs;
}

declare module "yargs/helpers" {
  export function hideBin(argv: string[]): string[];
}
