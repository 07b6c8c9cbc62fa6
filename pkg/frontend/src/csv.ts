/**
 * Readers for the documented run-directory CSV schemas.  This package
 * talks to the solver package only through these files.
 */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import Papa from "papaparse";

export interface ProfileSnapshot {
  t: number;
  /** g[i][j]: row = x-cell, column = xi-cell */
  g: number[][];
  nx: number;
  nxi: number;
  xiMax: number;
  length: number;
}

export interface MacroSnapshot {
  t: number;
  x: number[];
  rho: number[];
  u: number[];
  e: number[];
}

export interface SweepTable {
  columns: Record<string, number[]>;
  /** fitted slope footer per metric: slope, floor, r2 (NaN when absent) */
  slopes: Record<string, { slope: number; floor: number; r2: number }>;
}

export class MissingSnapshotError extends Error {}

function parseHeaded(text: string): Record<string, number[]> {
  const body = text
    .split("\n")
    .filter((ln) => ln.length > 0 && !ln.startsWith("#"))
    .join("\n");
  const parsed = Papa.parse<Record<string, string>>(body, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const out: Record<string, number[]> = {};
  for (const f of fields) out[f] = [];
  for (const row of parsed.data) {
    for (const f of fields) {
      const v = row[f];
      out[f].push(v === "" || v === undefined ? NaN : Number(v));
    }
  }
  return out;
}

export function readMacroSnapshot(path: string, t: number): MacroSnapshot {
  const cols = parseHeaded(readFileSync(path, "utf-8"));
  for (const key of ["x", "rho", "u", "e"]) {
    if (!(key in cols)) throw new Error(`${path}: missing column ${key}`);
  }
  return { t, x: cols.x, rho: cols.rho, u: cols.u, e: cols.e };
}

export function readProfileSnapshot(csvPath: string): ProfileSnapshot {
  const metaPath = csvPath.replace(/\.csv$/, ".json");
  const meta = JSON.parse(readFileSync(metaPath, "utf-8"));
  const g = readFileSync(csvPath, "utf-8")
    .split("\n")
    .filter((ln) => ln.length > 0)
    .map((ln) => ln.split(",").map(Number));
  if (g.length !== meta.nx || g[0].length !== meta.nxi) {
    throw new Error(`${csvPath}: shape ${g.length}x${g[0].length} does not match sidecar`);
  }
  return {
    t: meta.t,
    g,
    nx: meta.nx,
    nxi: meta.nxi,
    xiMax: meta.xi_max,
    length: meta.length,
  };
}

function snapshotTime(name: string, prefix: string): number | null {
  const m = name.match(new RegExp(`^${prefix}_t([0-9]+\\.[0-9]+)\\.csv$`));
  return m ? Number(m[1]) : null;
}

/** All profile snapshots in a run directory, sorted by time. */
export function listProfileSnapshots(
  runDir: string,
  prefix = "g",
): ProfileSnapshot[] {
  const snaps: ProfileSnapshot[] = [];
  for (const name of readdirSync(runDir)) {
    const t = snapshotTime(name, prefix);
    if (t !== null) snaps.push(readProfileSnapshot(join(runDir, name)));
  }
  snaps.sort((a, b) => a.t - b.t);
  return snaps;
}

export function listMacroSnapshots(runDir: string): MacroSnapshot[] {
  const snaps: MacroSnapshot[] = [];
  for (const name of readdirSync(runDir)) {
    const t = snapshotTime(name, "eas");
    if (t !== null) snaps.push(readMacroSnapshot(join(runDir, name), t));
  }
  snaps.sort((a, b) => a.t - b.t);
  return snaps;
}

/** Sweep table plus its '# slope,<metric>,...' footer block. */
export function readSweepTable(path: string): SweepTable {
  const text = readFileSync(path, "utf-8");
  const columns = parseHeaded(text);
  const slopes: SweepTable["slopes"] = {};
  for (const ln of text.split("\n")) {
    if (!ln.startsWith("# slope,")) continue;
    const parts = ln.slice(2).split(",");
    // slope,<key>,<val>,floor,<val>,r2,<val>
    slopes[parts[1]] = {
      slope: Number(parts[2]),
      floor: parts[4] === "" ? NaN : Number(parts[4]),
      r2: parts[6] === "" ? NaN : Number(parts[6]),
    };
  }
  return { columns, slopes };
}
