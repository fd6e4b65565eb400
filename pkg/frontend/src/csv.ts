/**
 * Trace-CSV reading and schema validation.
 *
 * A trace file holds one sampler run, one row per iteration:
 *   iteration, ess, resampled, mean_*, cov_**, recycled_mean_*, recycled_cov_**
 * The state dimension D is inferred from the recycled_mean_* columns and
 * every column the figures need must be present, otherwise parsing fails
 * with an error naming the missing column.
 */

import { readFileSync } from "fs";
import path from "path";

export interface Trace {
  label: string;
  path: string;
  dim: number;
  iterations: number[];
  ess: number[];
  columns: Map<string, number[]>;
}

/** Label for a trace path: file stem, or the parent dir for generic names. */
export function traceLabel(filePath: string): string {
  const stem = path.basename(filePath).replace(/\.csv$/i, "");
  if (/^trace(_\d+)?$/.test(stem)) {
    const parent = path.basename(path.dirname(filePath));
    return parent === "" || parent === "." ? stem : parent;
  }
  return stem;
}

export function parseTraceCsv(filePath: string): Trace {
  const text = readFileSync(filePath, "utf-8").trim();
  const lines = text.split(/\r?\n/);
  if (lines.length < 2) {
    throw new Error(`trace ${filePath} has no data rows`);
  }
  const header = lines[0].split(",");
  const columns = new Map<string, number[]>(header.map((name) => [name, []]));
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new Error(
        `trace ${filePath}: row with ${parts.length} fields, expected ${header.length}`
      );
    }
    parts.forEach((raw, i) => {
      const value = Number(raw);
      if (Number.isNaN(value)) {
        throw new Error(
          `trace ${filePath}: non-numeric value ${JSON.stringify(raw)} in column "${header[i]}"`
        );
      }
      columns.get(header[i])!.push(value);
    });
  }

  const dim = header.filter((name) => /^recycled_mean_\d+$/.test(name)).length;
  if (dim === 0) {
    throw new Error(`trace ${filePath} is missing column "recycled_mean_0"`);
  }
  const required = ["iteration", "ess", "resampled"];
  for (let i = 0; i < dim; i++) {
    required.push(`recycled_mean_${i}`);
    for (let j = 0; j < dim; j++) {
      required.push(`recycled_cov_${i}${j}`);
    }
  }
  for (const name of required) {
    if (!columns.has(name)) {
      throw new Error(`trace ${filePath} is missing column "${name}"`);
    }
  }

  return {
    label: traceLabel(filePath),
    path: filePath,
    dim,
    iterations: columns.get("iteration")!,
    ess: columns.get("ess")!,
    columns,
  };
}

export interface Truth {
  mean?: number[];
  cov?: number[][];
}

export function readTruth(filePath: string): Truth {
  const data = JSON.parse(readFileSync(filePath, "utf-8"));
  const truth: Truth = {};
  if (data.mean !== undefined) truth.mean = data.mean.map(Number);
  if (data.cov !== undefined) {
    truth.cov = data.cov.map((row: unknown[]) => row.map(Number));
  }
  return truth;
}
