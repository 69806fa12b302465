"""Level 1: within-island exploration intensity.

Pure functions over values; the caller owns the seeded rng stream.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .config import RunConfig
from .state import MODE_EXPLORATION, MODE_EXPLOITATION


@dataclass(frozen=True)
class SearchMode:
    mode: str              # exploration | exploitation
    intensity_used: float  # the exploration probability that was sampled against


def normalized_improvement(f_child: float, local_best: float, epsilon: float) -> float:
    """Scale-invariant improvement of a child over the island's current best.

    Non-improvements clamp to 0; the |local_best| + epsilon denominator keeps a
    zero best from dividing by zero.
    """
    return max((f_child - local_best) / (abs(local_best) + epsilon), 0.0)


def update_signal(g_prev: float, delta: float, rho: float) -> float:
    """Advance the accumulated improvement signal one step.

    Stagnation (delta == 0) is pure exponential decay; the branch keeps the
    decay bit-exact rather than adding a zero term.
    """
    if delta == 0.0:
        return rho * g_prev
    return rho * g_prev + (1.0 - rho) * delta * delta


def exploration_intensity(g: float, config: RunConfig) -> float:
    """Map the improvement signal to an exploration probability.

    Strictly decreasing in g: productive islands drift toward intensity_min
    (exploit), stagnant ones toward intensity_max (explore).
    """
    span = config.intensity_max - config.intensity_min
    return config.intensity_min + span / (1.0 + math.sqrt(g + config.epsilon))


def sample_mode(intensity: float, rng: random.Random) -> SearchMode:
    """Bernoulli draw: exploration with probability `intensity`."""
    mode = MODE_EXPLORATION if rng.random() < intensity else MODE_EXPLOITATION
    return SearchMode(mode=mode, intensity_used=intensity)
