import { createHash } from "crypto";
import { mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";

import { describe, expect, it } from "vitest";

import { main, parseArgs } from "../src/cli.js";

const FIXTURES = path.join(__dirname, "fixtures");

function sha256(file: string): string {
  return createHash("sha256").update(readFileSync(file)).digest("hex");
}

function tmp(): string {
  return mkdtempSync(path.join(tmpdir(), "plots-cli-"));
}

describe("parseArgs", () => {
  it("collects repeated traces and parses the zoom window", () => {
    const args = parseArgs([
      "--trace", "a.csv", "--trace", "b.csv",
      "--truth", "t.json", "--zoom", "5:60", "--out", "figs",
    ]);
    expect(args.traces).toEqual(["a.csv", "b.csv"]);
    expect(args.zoom).toEqual([5, 60]);
    expect(args.out).toBe("figs");
  });

  it("rejects malformed input", () => {
    expect(() => parseArgs(["--out", "x"])).toThrow("--trace");
    expect(() => parseArgs(["--trace", "a.csv"])).toThrow("--out");
    expect(() => parseArgs(["--trace", "a.csv", "--zoom", "5", "--out", "x"]))
      .toThrow("a:b");
    expect(() => parseArgs(["--frobnicate"])).toThrow("unknown argument");
  });
});

describe("main", () => {
  it("renders the 2d toy figures with truth lines, leaving inputs untouched", async () => {
    const out = tmp();
    const truth = path.join(out, "truth.json");
    writeFileSync(truth, JSON.stringify({ mean: [3, 2], cov: [[1, 0], [0, 1]] }));
    const inputs = [
      path.join(FIXTURES, "toy_forward.csv"),
      path.join(FIXTURES, "toy_gauss-opt.csv"),
    ];
    const before = inputs.map(sha256);

    const code = await main([
      "--trace", inputs[0], "--trace", inputs[1],
      "--truth", truth, "--zoom", "1:30", "--out", out,
    ]);
    expect(code).toBe(0);

    for (const name of ["mean_convergence.svg", "cov_convergence.svg", "ess.svg"]) {
      const file = path.join(out, name);
      expect(statSync(file).size).toBeGreaterThan(500);
      expect(readFileSync(file, "utf-8")).toContain("</svg>");
    }
    expect(readFileSync(path.join(out, "mean_convergence.svg"), "utf-8"))
      .toContain("truth-line");
    expect(inputs.map(sha256)).toEqual(before);
  });

  it("renders the bimodal figures with PNG output when available", async () => {
    const out = tmp();
    const truth = path.join(out, "truth.json");
    writeFileSync(truth, JSON.stringify({ mean: [0], cov: [[10]] }));
    const code = await main([
      "--trace", path.join(FIXTURES, "bimodal_forward.csv"),
      "--trace", path.join(FIXTURES, "bimodal_gmm-opt_1.csv"),
      "--trace", path.join(FIXTURES, "bimodal_gmm-opt_2.csv"),
      "--truth", truth, "--zoom", "1:100", "--out", out,
    ]);
    expect(code).toBe(0);
    expect(statSync(path.join(out, "ess.svg")).size).toBeGreaterThan(500);
    let sharpAvailable = true;
    try {
      await import("sharp");
    } catch {
      sharpAvailable = false;
    }
    if (sharpAvailable) {
      for (const name of ["mean_convergence.png", "cov_convergence.png", "ess.png"]) {
        expect(statSync(path.join(out, name)).size).toBeGreaterThan(1000);
      }
    }
  });

  it("works without truth values", async () => {
    const out = tmp();
    const code = await main([
      "--trace", path.join(FIXTURES, "toy_forward.csv"), "--out", out,
    ]);
    expect(code).toBe(0);
    expect(readFileSync(path.join(out, "mean_convergence.svg"), "utf-8"))
      .not.toContain("truth-line");
  });

  it("fails cleanly on a bad zoom or bad schema", async () => {
    const out = tmp();
    expect(
      await main([
        "--trace", path.join(FIXTURES, "toy_forward.csv"),
        "--zoom", "1:5000", "--out", out,
      ])
    ).toBe(1);

    const bad = path.join(out, "bad.csv");
    writeFileSync(bad, "iteration,ess\n1,5\n");
    expect(await main(["--trace", bad, "--out", out])).toBe(1);
    expect(await main(["--out", out])).toBe(2);
  });
});
