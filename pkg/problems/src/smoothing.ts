// Signal smoothing scoring: candidates filter a fixed seeded noisy series and
// are judged on fidelity to the clean signal, smoothness, lag, and false
// trend changes.
//
// combined = fidelity * (0.4 + 0.6 * (0.5*smoothness + 0.25*lag + 0.25*trend))
//
// The fidelity gate keeps degenerate outputs (e.g. a flat zero line, which is
// perfectly smooth and lag-free) from scoring: no fidelity, no credit.

import { gaussian, mulberry32 } from "./rng.js";
import { clamp01, parseNumbers, type Metrics } from "./protocol.js";

export const SERIES_LENGTH = 500;
export const SERIES_SEED = 20240817;
export const NOISE_SIGMA = 0.6;
export const MAX_LAG = 20;
export const TREND_DEADBAND = 0.05;

export interface Series {
  clean: number[];
  noisy: number[];
}

export function referenceSeries(): Series {
  const uniform = mulberry32(SERIES_SEED);
  const gauss = gaussian(uniform);
  const clean: number[] = [];
  const noisy: number[] = [];
  const half = SERIES_LENGTH / 2;
  for (let i = 0; i < SERIES_LENGTH; i++) {
    const seasonal = 2.0 * Math.sin((2 * Math.PI * i) / 125);
    const trend = i < half ? (2.0 * i) / half : 2.0 - (1.5 * (i - half)) / half;
    clean.push(seasonal + trend);
    noisy.push(clean[i] + NOISE_SIGMA * gauss());
  }
  return { clean, noisy };
}

function mse(a: number[], b: number[]): number {
  let acc = 0;
  for (let i = 0; i < a.length; i++) acc += (a[i] - b[i]) ** 2;
  return acc / a.length;
}

function mean(xs: number[]): number {
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

function variance(xs: number[]): number {
  const m = mean(xs);
  return mse(xs, xs.map(() => m));
}

function roughness(xs: number[]): number {
  let acc = 0;
  for (let i = 2; i < xs.length; i++) {
    acc += (xs[i] - 2 * xs[i - 1] + xs[i - 2]) ** 2;
  }
  return acc / (xs.length - 2);
}

function correlationAtShift(out: number[], clean: number[], shift: number): number {
  // shift > 0 means `out` lags `clean` by that many samples
  let sum = 0;
  let count = 0;
  const mo = mean(out);
  const mc = mean(clean);
  for (let i = 0; i < out.length; i++) {
    const j = i - shift;
    if (j < 0 || j >= clean.length) continue;
    sum += (out[i] - mo) * (clean[j] - mc);
    count++;
  }
  return count ? sum / count : 0;
}

export function lagScore(out: number[], clean: number[]): number {
  if (variance(out) < 1e-12) return 0;
  let bestShift = 0;
  let bestCorr = -Infinity;
  for (let shift = -MAX_LAG; shift <= MAX_LAG; shift++) {
    const corr = correlationAtShift(out, clean, shift);
    if (corr > bestCorr) {
      bestCorr = corr;
      bestShift = shift;
    }
  }
  return clamp01(1 - Math.abs(bestShift) / MAX_LAG);
}

export function directionFlips(xs: number[], deadband: number = TREND_DEADBAND): number {
  let flips = 0;
  let last = 0;
  for (let i = 1; i < xs.length; i++) {
    const d = xs[i] - xs[i - 1];
    const sign = d > deadband ? 1 : d < -deadband ? -1 : 0;
    if (sign !== 0) {
      if (last !== 0 && sign !== last) flips++;
      last = sign;
    }
  }
  return flips;
}

export function trendScore(out: number[], series: Series): number {
  const cleanFlips = directionFlips(series.clean);
  const noisyExcess = Math.max(1, directionFlips(series.noisy) - cleanFlips);
  const falseFlips = Math.max(0, directionFlips(out) - cleanFlips);
  return clamp01(1 - falseFlips / noisyExcess);
}

export function scoreSmoothing(stdout: string, series: Series): Metrics {
  const out = parseNumbers(stdout);
  if (out.length !== SERIES_LENGTH) {
    return {
      combined_score: 0,
      fidelity: 0,
      smoothness: 0,
      lag_score: 0,
      trend_score: 0,
      valid: 0,
    };
  }
  const fidelity = clamp01(1 - mse(out, series.clean) / variance(series.clean));
  const smoothness = clamp01(1 - roughness(out) / roughness(series.noisy));
  const lag = lagScore(out, series.clean);
  const trend = trendScore(out, series);
  const combined = clamp01(
    fidelity * (0.4 + 0.6 * (0.5 * smoothness + 0.25 * lag + 0.25 * trend))
  );
  return {
    combined_score: combined,
    fidelity,
    smoothness,
    lag_score: lag,
    trend_score: trend,
    valid: 1,
  };
}
