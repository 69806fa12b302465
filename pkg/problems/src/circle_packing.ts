// Evaluator entry: score a circle-packing candidate.
//
// The candidate is a python program that prints one "x y r" triple per
// circle (any whitespace/JSON framing with exactly 3*N numbers works). N
// comes from CIRCLE_PACK_N (default 5).

import { expectedCircleCount, scorePacking } from "./packing.js";
import { candidatePathFromArgv, emit, runCandidate } from "./protocol.js";

const candidate = candidatePathFromArgv();
const count = expectedCircleCount();
const result = runCandidate(candidate);
if (!result.ok) {
  emit({ combined_score: 0, sum_radii: 0, num_circles: count, valid: 0, candidate_error: 1 });
}
emit(scorePacking(result.stdout, count));
