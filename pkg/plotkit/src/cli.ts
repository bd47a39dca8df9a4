#!/usr/bin/env node
/**
 * plot <kind> --in data.csv [more.csv ...] --out figure.svg
 *
 * Exit 0 on success, 1 on bad usage, unreadable input, or schema mismatch.
 * The output file is only written after the figure rendered cleanly.
 */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { SchemaError } from "./csv.js";
import { FIGURE_KINDS, FigureKind, FigureSpec, render } from "./figures.js";

const USAGE = `usage: plot <kind> --in CSV [CSV ...] --out FILE

kinds:
  selection_prob   summary.csv files: selection probability vs forcing
  roc              roc_*.csv files: ROC curves with diagonal reference
  gini_radius      radius_sweep.csv files: Gini score vs localization radius
  local_cme_strip  two series_*.csv files (correct version first): local evidence gap
`;

class UsageError extends Error {}

function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 0) {
    throw new UsageError("missing figure kind");
  }
  const kind = argv[0]!;
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new UsageError(`unknown figure kind ${JSON.stringify(kind)}`);
  }
  const inputs: string[] = [];
  let output: string | undefined;
  let i = 1;
  while (i < argv.length) {
    const arg = argv[i]!;
    if (arg === "--in") {
      i += 1;
      while (i < argv.length && !argv[i]!.startsWith("--")) {
        inputs.push(argv[i]!);
        i += 1;
      }
    } else if (arg === "--out") {
      if (i + 1 >= argv.length) throw new UsageError("--out needs a file path");
      output = argv[i + 1];
      i += 2;
    } else {
      throw new UsageError(`unexpected argument ${JSON.stringify(arg)}`);
    }
  }
  if (inputs.length === 0) throw new UsageError("--in needs at least one CSV path");
  if (output === undefined) throw new UsageError("--out is required");
  return { kind: kind as FigureKind, inputs, output };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`plot: ${err.message}`);
      console.error(USAGE);
      return 1;
    }
    throw err;
  }
  try {
    render(spec);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`plot: schema error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`plot: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

function invokedDirectly(): boolean {
  const entry = process.argv[1];
  if (!entry) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(entry)).href;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  process.exit(main(process.argv.slice(2)));
}
