import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { MissingSnapshotError } from "../src/csv.js";
import { pickPanelTimes, profilePanelsSvg, ratesSvg } from "../src/figures.js";
import { makeRunDir, makeSweepCsv } from "./fixtures.js";

describe("panel selection", () => {
  it("takes 4 equally spaced times including the endpoints", () => {
    const snaps = [0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6].map((t) => ({ t }));
    expect(pickPanelTimes(snaps)).toEqual([0, 0.2, 0.4, 0.6]);
  });

  it("errors naming the available times when fewer than 4", () => {
    expect(() => pickPanelTimes([{ t: 0 }])).toThrowError(MissingSnapshotError);
    expect(() => pickPanelTimes([{ t: 0 }])).toThrowError(/0\.0000/);
  });
});

describe("profile panels figure", () => {
  it("renders four panels plus line plots, initial profile in blue", () => {
    const svg = profilePanelsSvg(makeRunDir());
    expect(svg).toContain("<svg");
    expect((svg.match(/t = 0\./g) ?? []).length).toBe(4);
    expect(svg).toContain("density");
    expect(svg).toContain("velocity");
    expect(svg).toContain("#1f4fbf"); // distinguished initial curve
  });

  it("is deterministic across reruns", () => {
    const dir = makeRunDir();
    expect(profilePanelsSvg(dir)).toBe(profilePanelsSvg(dir));
  });

  it("fails on a run with only the initial snapshot", () => {
    expect(() => profilePanelsSvg(makeRunDir([0]))).toThrowError(
      MissingSnapshotError,
    );
  });
});

describe("rates figure", () => {
  it("renders one panel per metric with annotated slopes", () => {
    const svg = ratesSvg(makeSweepCsv());
    expect(svg).toContain(">w1_rho<");
    expect(svg).toContain(">w1_g<");
    expect(svg).toContain("slope 2.004");
    expect(svg).toContain("slope 1.000");
  });

  it("annotated slope matches the footer value", () => {
    const path = makeSweepCsv();
    const footer = readFileSync(path, "utf-8")
      .split("\n")
      .find((ln) => ln.startsWith("# slope,w1_rho,"))!;
    const value = Number(footer.split(",")[2]);
    expect(ratesSvg(path)).toContain(`slope ${value.toFixed(3)}`);
  });

  it("rejects a single-point sweep", () => {
    expect(() => ratesSvg(makeSweepCsv(1))).toThrowError(/at least 2/);
  });
});
