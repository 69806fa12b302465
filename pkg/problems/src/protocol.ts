// Subprocess-protocol plumbing shared by the pack evaluators.
//
// Protocol: argv = [evaluator, candidatePath]; stdout = one JSON object of
// metric name -> number; exit 0. A bad *candidate* is a zero score, never a
// nonzero exit: only internal evaluator bugs crash.

import { spawnSync } from "node:child_process";

export interface Metrics {
  [name: string]: number;
}

export const CANDIDATE_TIMEOUT_MS = 10_000;

export function emit(metrics: Metrics): never {
  console.log(JSON.stringify(metrics));
  process.exit(0);
}

export function candidatePathFromArgv(): string {
  const path = process.argv[2];
  if (!path) {
    console.error("usage: node <evaluator.js> <candidate-path>");
    process.exit(64);
  }
  return path;
}

export interface RunResult {
  ok: boolean;
  stdout: string;
}

/** Run a candidate program (python3) and capture stdout. */
export function runCandidate(candidatePath: string, args: string[] = []): RunResult {
  const proc = spawnSync("python3", [candidatePath, ...args], {
    encoding: "utf8",
    timeout: CANDIDATE_TIMEOUT_MS,
  });
  if (proc.error || proc.status !== 0) {
    return { ok: false, stdout: proc.stdout ?? "" };
  }
  return { ok: true, stdout: proc.stdout ?? "" };
}

const NUMBER_RE = /[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?/g;

/** Pull every numeric token out of candidate stdout (JSON or whitespace). */
export function parseNumbers(text: string): number[] {
  const matches = text.match(NUMBER_RE) ?? [];
  return matches.map(Number).filter((v) => Number.isFinite(v));
}

export function clamp01(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(1, Math.max(0, value));
}
