"""In-process toy evaluators for tests and offline CLI runs (`builtin:<name>`).

Both toys read the candidate as plain text and take its last numeric literal
as the candidate's value, so scripted mock children like "x = 2.5" work.
"""

from __future__ import annotations

import re
from typing import Callable

_FLOAT_RE = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")

QUADRATIC_OPTIMUM = 3.0


def _last_number(source: str) -> float:
    matches = _FLOAT_RE.findall(source)
    if not matches:
        raise ValueError("candidate contains no numeric literal")
    return float(matches[-1])


def quadratic_evaluator(source: str) -> dict[str, float]:
    """Score -(x - 3)^2: analytic optimum 0 at x = 3."""
    x = _last_number(source)
    score = -((x - QUADRATIC_OPTIMUM) ** 2)
    return {"combined_score": score, "x": x}


def value_evaluator(source: str) -> dict[str, float]:
    """Score the candidate's value itself; useful for synthetic schedules."""
    return {"combined_score": _last_number(source)}


TOY_EVALUATORS: dict[str, Callable[[str], dict[str, float]]] = {
    "quadratic": quadratic_evaluator,
    "value": value_evaluator,
}
