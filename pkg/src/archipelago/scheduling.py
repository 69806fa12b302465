"""Level 2: globally normalized bandit rewards and decayed-UCB island selection."""

from __future__ import annotations

import math
import random
from dataclasses import replace

from .state import AdaptiveSignals


def global_reward(f_child: float, local_best: float, global_best: float, epsilon: float) -> float:
    """Bandit reward for an improvement, normalized by the global best.

    Normalizing by the global rather than the local best removes the bias
    toward islands making trivial refinements of poor solutions: the same
    absolute gain earns the same reward on every island.

    Callers invoke this only when f_child > local_best; rewards are 0 otherwise.
    """
    return max((f_child - local_best) / (abs(global_best) + epsilon), 0.0)


def decay_stats(signals: AdaptiveSignals, reward: float, rho: float) -> AdaptiveSignals:
    """Fold one visit into the island's decayed reward/visit statistics."""
    return replace(
        signals,
        decayed_reward=rho * signals.decayed_reward + reward,
        decayed_visits=rho * signals.decayed_visits + 1.0,
        visits=signals.visits + 1,
    )


def ucb_select(
    islands: list[AdaptiveSignals],
    total_visits: int,
    c: float,
    rng: random.Random,
) -> int:
    """Pick the island to work on this iteration.

    Unvisited islands take absolute priority (uniform among them); otherwise
    the argmax of decayed-mean reward plus the UCB exploration bonus, with
    exact ties broken uniformly at random.
    """
    if not islands:
        raise ValueError("cannot select from an empty island list")
    if len(islands) == 1:
        return 0

    unvisited = [i for i, sig in enumerate(islands) if sig.visits == 0]
    if unvisited:
        return rng.choice(unvisited)

    log_n = math.log(total_visits)
    scores = [
        sig.decayed_reward / sig.decayed_visits + c * math.sqrt(log_n / sig.visits)
        for sig in islands
    ]
    best = max(scores)
    top = [i for i, score in enumerate(scores) if score == best]
    if len(top) == 1:
        return top[0]
    return rng.choice(top)
