#!/usr/bin/env node
/** CLI: render figures from run-directory CSVs. */

import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { profilePanelsSvg, ratesSvg } from "./figures.js";

await yargs(hideBin(process.argv))
  .scriptName("monokin-viewer")
  .command(
    "panels <runDir>",
    "render phase-space panels plus density/velocity lines",
    (y) =>
      y
        .positional("runDir", { type: "string", demandOption: true })
        .option("output", { type: "string", default: "panels.svg" }),
    (argv) => {
      writeFileSync(argv.output, profilePanelsSvg(argv.runDir));
      console.log(`wrote ${argv.output}`);
    },
  )
  .command(
    "rates <sweepCsv>",
    "render log-log rate plots with annotated slopes",
    (y) =>
      y
        .positional("sweepCsv", { type: "string", demandOption: true })
        .option("output", { type: "string", default: "rates.svg" }),
    (argv) => {
      writeFileSync(argv.output, ratesSvg(argv.sweepCsv));
      console.log(`wrote ${argv.output}`);
    },
  )
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    console.error(err ? `error: ${err.message}` : msg);
    process.exit(1);
  })
  .parse();
