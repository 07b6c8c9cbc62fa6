/**
 * Figure builders: multi-panel phase-space snapshots and log-log
 * convergence-rate plots, both rendered as deterministic SVG.
 */

import { scaleLinear, scaleLog } from "d3-scale";
import { interpolateViridis, interpolateTurbo } from "d3-scale-chromatic";
import { line } from "d3-shape";
import {
  listMacroSnapshots,
  listProfileSnapshots,
  MacroSnapshot,
  MissingSnapshotError,
  ProfileSnapshot,
  readSweepTable,
} from "./csv.js";
import { SvgDoc } from "./svg.js";

const PANEL = 180;
const GAP = 26;
const MARGIN = 42;
const INITIAL_COLOR = "#1f4fbf"; // the t = 0 curve is singled out in blue

/** Pick 4 equally spaced snapshots (always including the last). */
export function pickPanelTimes(snaps: { t: number }[]): number[] {
  if (snaps.length < 4) {
    const have = snaps.map((s) => s.t.toFixed(4)).join(", ");
    throw new MissingSnapshotError(
      `need at least 4 snapshot times for the panel figure, found ` +
        `${snaps.length} (${have || "none"})`,
    );
  }
  const idx = [0, 1, 2, 3].map((k) =>
    Math.round((k * (snaps.length - 1)) / 3),
  );
  return idx.map((i) => snaps[i].t);
}

function heatPanel(
  doc: SvgDoc,
  snap: ProfileSnapshot,
  x0: number,
  y0: number,
  gMax: number,
): void {
  const cw = PANEL / snap.nx;
  const ch = PANEL / snap.nxi;
  for (let i = 0; i < snap.nx; i++) {
    for (let j = 0; j < snap.nxi; j++) {
      const v = snap.g[i][j] / gMax;
      // rows are x-cells; draw x horizontally, xi vertically (top = +xi_max)
      doc.rect(
        x0 + i * cw,
        y0 + (snap.nxi - 1 - j) * ch,
        cw + 0.5,
        ch + 0.5,
        interpolateViridis(Math.min(1, v)),
      );
    }
  }
  doc.element("rect", {
    x: x0,
    y: y0,
    width: PANEL,
    height: PANEL,
    fill: "none",
    stroke: "#333",
  });
  doc.text(x0 + PANEL / 2, y0 - 6, `t = ${snap.t.toFixed(4)}`, {
    "text-anchor": "middle",
    "font-size": 11,
  });
}

function linePanel(
  doc: SvgDoc,
  snaps: MacroSnapshot[],
  field: "rho" | "u",
  x0: number,
  y0: number,
  width: number,
  label: string,
): void {
  const all = snaps.flatMap((s) => s[field]);
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const pad = 0.05 * (hi - lo || 1);
  const sx = scaleLinear([0, 1], [x0, x0 + width]);
  const sy = scaleLinear([lo - pad, hi + pad], [y0 + PANEL, y0]);
  const tMax = snaps[snaps.length - 1].t || 1;
  const gen = line<number[]>((d) => sx(d[0]), (d) => sy(d[1]));

  for (const s of snaps) {
    const pts = s.x.map((xi, k) => [xi, s[field][k]]);
    const isInitial = s === snaps[0];
    doc.path(gen(pts) ?? "", isInitial ? INITIAL_COLOR : interpolateTurbo(0.15 + 0.7 * (s.t / tMax)), {
      "stroke-width": isInitial ? 2.2 : 1.3,
      "stroke-dasharray": isInitial ? "none" : "none",
    });
  }
  doc.element("rect", {
    x: x0,
    y: y0,
    width,
    height: PANEL,
    fill: "none",
    stroke: "#333",
  });
  doc.text(x0 + width / 2, y0 - 6, label, {
    "text-anchor": "middle",
    "font-size": 12,
  });
  doc.text(x0 + width / 2, y0 + PANEL + 16, "x", {
    "text-anchor": "middle",
    "font-size": 11,
  });
}

/**
 * Four equally spaced phase-space panels (time moves left to right)
 * above density and velocity line plots; the initial profile is drawn
 * in blue.
 */
export function profilePanelsSvg(runDir: string): string {
  const prefixes = ["g", "gveps", "gfp"];
  let snaps: ProfileSnapshot[] = [];
  for (const p of prefixes) {
    snaps = listProfileSnapshots(runDir, p);
    if (snaps.length > 0) break;
  }
  const times = pickPanelTimes(snaps);
  const chosen = times.map((t) => snaps.find((s) => s.t === t)!);
  const macro = listMacroSnapshots(runDir);

  const width = MARGIN * 2 + 4 * PANEL + 3 * GAP;
  const height = MARGIN * 2 + 2 * PANEL + GAP + 30;
  const doc = new SvgDoc(width, height);
  doc.rect(0, 0, width, height, "#ffffff");

  const gMax = Math.max(...chosen.flatMap((s) => s.g.flat()));
  chosen.forEach((s, k) => {
    heatPanel(doc, s, MARGIN + k * (PANEL + GAP), MARGIN, gMax);
  });
  doc.text(MARGIN - 18, MARGIN + PANEL / 2, "ξ", { "font-size": 12 });

  if (macro.length > 0) {
    const half = (4 * PANEL + 3 * GAP - GAP) / 2;
    const y1 = MARGIN + PANEL + GAP + 14;
    linePanel(doc, macro, "rho", MARGIN, y1, half, "density");
    linePanel(doc, macro, "u", MARGIN + half + GAP, y1, half, "velocity");
  }
  return doc.render();
}

/** Log-log distance-vs-eps panels with fitted-slope annotations. */
export function ratesSvg(sweepPath: string): string {
  const { columns, slopes } = readSweepTable(sweepPath);
  const eps = columns.eps;
  if (!eps || eps.length < 2) {
    throw new Error(
      `need at least 2 sweep points for a rate plot, found ${eps?.length ?? 0}`,
    );
  }
  const skip = new Set(["eps", "sigma", "delta", "t"]);
  const metrics = Object.keys(columns).filter((k) => !skip.has(k));

  const width = MARGIN * 2 + metrics.length * PANEL + (metrics.length - 1) * GAP;
  const height = MARGIN * 2 + PANEL + 24;
  const doc = new SvgDoc(width, height);
  doc.rect(0, 0, width, height, "#ffffff");

  metrics.forEach((key, k) => {
    const x0 = MARGIN + k * (PANEL + GAP);
    const y0 = MARGIN;
    const vals = columns[key];
    const sx = scaleLog([Math.min(...eps), Math.max(...eps)], [x0, x0 + PANEL]);
    const lo = Math.min(...vals.filter((v) => v > 0));
    const hi = Math.max(...vals);
    const sy = scaleLog([lo, hi * 1.05], [y0 + PANEL, y0]);
    const gen = line<number[]>((d) => sx(d[0]), (d) => sy(d[1]));
    const pts = eps
      .map((e, i) => [e, vals[i]])
      .filter((d) => d[1] > 0)
      .sort((a, b) => a[0] - b[0]);
    doc.path(gen(pts) ?? "", "#d0342c", { "stroke-width": 1.5 });
    for (const [e, v] of pts) {
      doc.element("circle", { cx: sx(e).toFixed(2), cy: sy(v).toFixed(2), r: 3, fill: "#d0342c" });
    }
    doc.element("rect", {
      x: x0,
      y: y0,
      width: PANEL,
      height: PANEL,
      fill: "none",
      stroke: "#333",
    });
    doc.text(x0 + PANEL / 2, y0 - 6, key, {
      "text-anchor": "middle",
      "font-size": 12,
    });
    doc.text(x0 + PANEL / 2, y0 + PANEL + 16, "ε", {
      "text-anchor": "middle",
      "font-size": 11,
    });
    const fit = slopes[key];
    if (fit && Number.isFinite(fit.slope)) {
      doc.text(x0 + 8, y0 + 16, `slope ${fit.slope.toFixed(3)}`, {
        "font-size": 11,
        fill: "#222",
      });
    }
  });
  return doc.render();
}
