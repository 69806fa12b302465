// Evaluator entry: score a signal-smoothing candidate.
//
// The candidate is a python program invoked as `python3 candidate.py
// <series.json>`; it reads the JSON array of noisy samples and prints the
// filtered series (500 numbers, whitespace or JSON framing).

import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { candidatePathFromArgv, emit, runCandidate, type Metrics } from "./protocol.js";
import { referenceSeries, scoreSmoothing } from "./smoothing.js";

const FAILURE: Metrics = {
  combined_score: 0,
  fidelity: 0,
  smoothness: 0,
  lag_score: 0,
  trend_score: 0,
  valid: 0,
  candidate_error: 1,
};

const candidate = candidatePathFromArgv();
const series = referenceSeries();

const scratchBase = process.env.ARCHIPELAGO_SCRATCH_DIR ?? tmpdir();
const workDir = mkdtempSync(join(scratchBase, "smoothing-"));
let metrics: Metrics;
try {
  const seriesPath = join(workDir, "series.json");
  writeFileSync(seriesPath, JSON.stringify(series.noisy));
  const result = runCandidate(candidate, [seriesPath]);
  metrics = result.ok ? scoreSmoothing(result.stdout, series) : FAILURE;
} finally {
  rmSync(workDir, { recursive: true, force: true });
}
emit(metrics);
