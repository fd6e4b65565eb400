/**
 * Figure assembly: one convergence figure per moment group (means,
 * covariances) with a line per strategy and dashed truth lines, plus an
 * ESS figure with full-range and zoomed panels.
 */

import { mkdirSync, writeFileSync } from "fs";
import path from "path";

import { Panel, renderFigure } from "./chart.js";
import { Trace, Truth } from "./csv.js";

/** Strategy palette, baseline first: black / red / blue, then extras. */
const COLORS = ["#111111", "#d62728", "#1f77b4", "#ff7f0e", "#9467bd"];

export interface PlotJob {
  traces: Trace[];
  truth: Truth;
  zoom: [number, number];
  outDir: string;
}

export function checkJob(job: PlotJob): void {
  if (job.traces.length === 0) {
    throw new Error("need at least one input trace");
  }
  const dims = new Set(job.traces.map((t) => t.dim));
  if (dims.size !== 1) {
    throw new Error(
      `traces disagree on dimension: ${[...dims].sort().join(", ")}`
    );
  }
  const maxIter = Math.max(...job.traces.map((t) => t.iterations.length));
  const [lo, hi] = job.zoom;
  if (!(lo >= 1 && hi <= maxIter && lo < hi)) {
    throw new Error(
      `zoom window ${lo}:${hi} must satisfy 1 <= a < b <= ${maxIter}`
    );
  }
}

export function defaultZoom(traces: Trace[]): [number, number] {
  const maxIter = Math.max(...traces.map((t) => t.iterations.length));
  return [1, Math.max(Math.min(10, maxIter), Math.ceil(maxIter / 10))];
}

function seriesFor(traces: Trace[], column: string) {
  return traces.map((t, i) => ({
    label: t.label,
    color: COLORS[i % COLORS.length],
    x: t.iterations,
    y: t.columns.get(column)!,
  }));
}

export function meansFigure(job: PlotJob): string {
  const dim = job.traces[0].dim;
  const panels: Panel[] = [];
  for (let i = 0; i < dim; i++) {
    panels.push({
      title: `E[x${i}]`,
      series: seriesFor(job.traces, `recycled_mean_${i}`),
      truth: job.truth.mean?.[i],
    });
  }
  return renderFigure(panels, { title: "Recycled mean estimates" });
}

export function covFigure(job: PlotJob): string {
  const dim = job.traces[0].dim;
  const panels: Panel[] = [];
  for (let i = 0; i < dim; i++) {
    for (let j = i; j < dim; j++) {
      panels.push({
        title: `Cov[x${i}, x${j}]`,
        series: seriesFor(job.traces, `recycled_cov_${i}${j}`),
        truth: job.truth.cov?.[i]?.[j],
      });
    }
  }
  return renderFigure(panels, { title: "Recycled covariance estimates" });
}

export function essFigure(job: PlotJob): string {
  const series = job.traces.map((t, i) => ({
    label: t.label,
    color: COLORS[i % COLORS.length],
    x: t.iterations,
    y: t.ess,
  }));
  const panels: Panel[] = [
    { title: "(a) effective sample size", series },
    {
      title: `(b) zoom: iterations ${job.zoom[0]}-${job.zoom[1]}`,
      series,
      xRange: job.zoom,
    },
  ];
  return renderFigure(panels, { title: "Effective sample size" });
}

async function toPng(svg: string): Promise<Buffer | null> {
  try {
    const sharp = (await import("sharp")).default;
    return await sharp(Buffer.from(svg), { density: 144 }).png().toBuffer();
  } catch (err) {
    console.warn(`PNG conversion unavailable (${(err as Error).message}); SVG only`);
    return null;
  }
}

/** Render all figures into outDir; returns the files written. */
export async function plotTraces(job: PlotJob): Promise<string[]> {
  checkJob(job);
  mkdirSync(job.outDir, { recursive: true });
  const figures: Array<[string, string]> = [
    ["mean_convergence", meansFigure(job)],
    ["cov_convergence", covFigure(job)],
    ["ess", essFigure(job)],
  ];
  const written: string[] = [];
  for (const [name, svg] of figures) {
    const svgPath = path.join(job.outDir, `${name}.svg`);
    writeFileSync(svgPath, svg);
    written.push(svgPath);
    const png = await toPng(svg);
    if (png !== null) {
      const pngPath = path.join(job.outDir, `${name}.png`);
      writeFileSync(pngPath, png);
      written.push(pngPath);
    }
  }
  return written;
}
