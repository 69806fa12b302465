// Circle packing scoring: N disjoint circles inside the unit square,
// score = sum of radii. Geometry violations score 0.

import { clamp01, parseNumbers, type Metrics } from "./protocol.js";

export const GEOMETRY_TOLERANCE = 1e-9;
export const DEFAULT_CIRCLE_COUNT = 5;

export interface Circle {
  x: number;
  y: number;
  r: number;
}

export function expectedCircleCount(): number {
  const raw = process.env.CIRCLE_PACK_N;
  const n = raw ? Number.parseInt(raw, 10) : DEFAULT_CIRCLE_COUNT;
  return Number.isInteger(n) && n > 0 ? n : DEFAULT_CIRCLE_COUNT;
}

export function parseCircles(stdout: string, count: number): Circle[] | null {
  const numbers = parseNumbers(stdout);
  if (numbers.length !== count * 3) return null;
  const circles: Circle[] = [];
  for (let i = 0; i < count; i++) {
    circles.push({ x: numbers[3 * i], y: numbers[3 * i + 1], r: numbers[3 * i + 2] });
  }
  return circles;
}

export function validatePacking(circles: Circle[], tol: number = GEOMETRY_TOLERANCE): boolean {
  for (const c of circles) {
    if (c.r <= 0) return false;
    if (c.x - c.r < -tol || c.x + c.r > 1 + tol) return false;
    if (c.y - c.r < -tol || c.y + c.r > 1 + tol) return false;
  }
  for (let i = 0; i < circles.length; i++) {
    for (let j = i + 1; j < circles.length; j++) {
      const dist = Math.hypot(circles[i].x - circles[j].x, circles[i].y - circles[j].y);
      if (dist < circles[i].r + circles[j].r - tol) return false;
    }
  }
  return true;
}

export function scorePacking(stdout: string, count: number): Metrics {
  const circles = parseCircles(stdout, count);
  if (circles === null) {
    return { combined_score: 0, sum_radii: 0, num_circles: count, valid: 0 };
  }
  if (!validatePacking(circles)) {
    return { combined_score: 0, sum_radii: 0, num_circles: count, valid: 0 };
  }
  const sum = circles.reduce((acc, c) => acc + c.r, 0);
  return { combined_score: sum, sum_radii: sum, num_circles: count, valid: 1 };
}
