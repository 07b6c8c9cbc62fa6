import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Write a minimal synthetic run directory with the documented schemas. */
export function makeRunDir(times: number[] = [0, 0.1, 0.2, 0.3]): string {
  const dir = mkdtempSync(join(tmpdir(), "viewer-"));
  const nx = 8;
  const nxi = 6;
  for (const t of times) {
    const rows: string[] = [];
    for (let i = 0; i < nx; i++) {
      const row: number[] = [];
      for (let j = 0; j < nxi; j++) {
        row.push(Math.exp(-t) * (1 + i * 0.01 + j * 0.001));
      }
      rows.push(row.join(","));
    }
    const base = `g_t${t.toFixed(4)}`;
    writeFileSync(join(dir, `${base}.csv`), rows.join("\n") + "\n");
    writeFileSync(
      join(dir, `${base}.json`),
      JSON.stringify({
        t,
        nx,
        nxi,
        xi_max: 3.0,
        length: 1.0,
        layout: "rows are x-cells, columns are xi-cells",
      }),
    );

    const lines = ["x,rho,u,e"];
    for (let i = 0; i < nx; i++) {
      const x = (i + 0.5) / nx;
      lines.push(
        [x, 1 + 0.1 * Math.sin(2 * Math.PI * x) * t, 0.2 * Math.cos(2 * Math.PI * x), 1].join(","),
      );
    }
    writeFileSync(join(dir, `eas_t${t.toFixed(4)}.csv`), lines.join("\n") + "\n");
  }
  return dir;
}

export function makeSweepCsv(points = 4): string {
  const dir = mkdtempSync(join(tmpdir(), "viewer-sweep-"));
  const path = join(dir, "sweep.csv");
  const lines = ["eps,t,w1_rho,w1_g"];
  const epsList = [0.4, 0.2, 0.1, 0.05].slice(0, points);
  for (const e of epsList) {
    lines.push([e, 0.5, 0.02 * e ** 2, 0.1 * e].join(","));
  }
  if (points >= 2) {
    lines.push("# slope,w1_rho,2.0041,floor,1e-06,r2,0.9993");
    lines.push("# slope,w1_g,1.0002,floor,0,r2,0.99999");
  }
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}
