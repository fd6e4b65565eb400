#!/usr/bin/env node
/**
 * plot_traces — figures from smc-optl trace CSVs.
 *
 * Usage:
 *   plot_traces --trace run_a/trace.csv [--trace run_b/trace.csv ...]
 *               [--truth truth.json] [--zoom a:b] --out figures/
 *
 * Writes mean_convergence, cov_convergence and ess figures (SVG, plus
 * PNG when the converter is available) into the output directory. The
 * truth JSON may hold "mean" (vector) and "cov" (matrix) for dashed
 * reference lines; inputs are only ever read.
 */

import { pathToFileURL } from "url";

import { parseTraceCsv, readTruth, Truth } from "./csv.js";
import { defaultZoom, plotTraces } from "./plot.js";

interface Args {
  traces: string[];
  truth?: string;
  zoom?: [number, number];
  out?: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { traces: [] };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`${flag} needs a value`);
      return v;
    };
    switch (flag) {
      case "--trace":
        args.traces.push(value());
        break;
      case "--truth":
        args.truth = value();
        break;
      case "--zoom": {
        const raw = value();
        const match = /^(\d+):(\d+)$/.exec(raw);
        if (!match) throw new Error(`--zoom expects a:b, got ${raw}`);
        args.zoom = [Number(match[1]), Number(match[2])];
        break;
      }
      case "--out":
        args.out = value();
        break;
      default:
        throw new Error(`unknown argument ${flag}`);
    }
  }
  if (args.traces.length === 0) throw new Error("at least one --trace is required");
  if (!args.out) throw new Error("--out is required");
  return args;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const traces = args.traces.map(parseTraceCsv);
    const truth: Truth = args.truth ? readTruth(args.truth) : {};
    const written = await plotTraces({
      traces,
      truth,
      zoom: args.zoom ?? defaultZoom(traces),
      outDir: args.out!,
    });
    for (const file of written) console.log(file);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
