"""Level 3: solution-tactic generation and lifecycle on global stagnation."""

from __future__ import annotations

import re

from .config import to_raw
from .operators import MutationOperator, OperatorError
from .prompts import TACTIC_SYSTEM_MESSAGE
from .state import (
    TACTIC_ACTIVE,
    TACTIC_EXHAUSTED,
    TACTIC_FRESH,
    GlobalState,
    TacticRecord,
)

MAX_TACTICS_PER_CALL = 5

_TACTIC_HEADER_RE = re.compile(r"^\s*(?:#{1,4}\s*)?(?:\*\*)?TACTIC\b", re.IGNORECASE)
_FIELD_ALIASES = {
    "idea": "idea",
    "description": "description",
    "how to implement": "description",
    "implementation": "description",
    "what_to_optimize": "what_to_optimize",
    "what to optimize": "what_to_optimize",
    "target metric": "what_to_optimize",
    "cautions": "cautions",
    "caution": "cautions",
    "approach_type": "approach_type",
    "approach type": "approach_type",
}
_FIELD_RE = re.compile(
    r"^\s*(?:[-*]\s*)?(?:\*\*)?(?P<name>[A-Za-z_ ]+?)(?:\*\*)?\s*:\s*(?:\*\*\s*)?(?P<value>.*)$"
)


class TacticParseError(ValueError):
    """No usable tactic could be parsed from a generator response."""


def compose_tactics_prompt(
    problem_spec: str,
    evaluator_source: str,
    best_source: str,
    best_fitness: float,
    past_tactics: list[TacticRecord],
) -> tuple[str, str]:
    """Build the (system, user) pair for one tactic-generation call."""
    if past_tactics:
        lines = []
        for tactic in past_tactics:
            lines.append(
                f"- [{tactic.status}] {tactic.idea} "
                f"(trials={tactic.trials}, improvements={tactic.improvements_attributed})"
            )
        history = "\n".join(lines)
    else:
        history = "(none)"

    user_text = f"""The search has stagnated globally. Propose breakthrough solution tactics.

--PROBLEM SPECIFICATION
{problem_spec}

--EVALUATOR SOURCE
{evaluator_source}

--CURRENT BEST PROGRAM (score: {best_fitness:g})
```
{best_source}
```

--PREVIOUSLY TRIED TACTICS
{history}

Respond with 1-{MAX_TACTICS_PER_CALL} tactics, each in exactly this format:

TACTIC <number>:
IDEA: <one-sentence strategy>
DESCRIPTION: <how to implement it>
WHAT_TO_OPTIMIZE: <the metric or weakness it targets>
CAUTIONS: <pitfalls to avoid>
APPROACH_TYPE: <short label, e.g. a library call or technique name>"""
    return TACTIC_SYSTEM_MESSAGE, user_text


def parse_tactics(text: str) -> list[dict[str, str]]:
    """Lenient parse of a tactic-generator response.

    Blocks start at TACTIC headings (or the whole text when there are none);
    fields are `NAME: value` lines with the value continuing until the next
    field. A block needs a non-empty IDEA to count; other fields default to
    empty. Raises TacticParseError when nothing usable is found.
    """
    lines = text.splitlines()
    block_starts = [i for i, line in enumerate(lines) if _TACTIC_HEADER_RE.match(line)]
    if block_starts:
        bounds = list(zip(block_starts, block_starts[1:] + [len(lines)]))
        blocks = [lines[start + 1 : end] for start, end in bounds]
    else:
        blocks = [lines]

    tactics = []
    for block in blocks:
        fields: dict[str, list[str]] = {}
        current: str | None = None
        for line in block:
            match = _FIELD_RE.match(line)
            canonical = None
            if match:
                canonical = _FIELD_ALIASES.get(match.group("name").strip().lower())
            if canonical:
                current = canonical
                fields[current] = [match.group("value").strip()]
            elif current and line.strip():
                fields[current].append(line.strip())
        parsed = {name: "\n".join(parts).strip() for name, parts in fields.items()}
        if parsed.get("idea"):
            tactics.append(
                {
                    "idea": parsed["idea"],
                    "description": parsed.get("description", ""),
                    "what_to_optimize": parsed.get("what_to_optimize", ""),
                    "cautions": parsed.get("cautions", ""),
                    "approach_type": parsed.get("approach_type", ""),
                }
            )
        if len(tactics) == MAX_TACTICS_PER_CALL:
            break

    if not tactics:
        raise TacticParseError("no tactic with a non-empty IDEA found in response")
    return tactics


def generate_tactics(
    state: GlobalState,
    operator: MutationOperator,
    problem_spec: str,
    evaluator_source: str,
) -> list[TacticRecord]:
    """Call the tactic generator and activate the first parsed tactic.

    An unparseable response is retried once; a second failure is a no-op so
    the search continues untouched.
    """
    best = state.best_record()
    display_best = to_raw(state.global_best_fitness, state.config.objective_sense)
    system_text, user_text = compose_tactics_prompt(
        problem_spec, evaluator_source, best.source, display_best, state.tactics
    )

    parsed: list[dict[str, str]] | None = None
    for _ in range(2):
        state.tactic_calls += 1
        try:
            response = operator.generate(
                system_text, user_text, tag=f"tactic:{state.tactic_calls}"
            )
            parsed = parse_tactics(response)
            break
        except (OperatorError, TacticParseError):
            continue
    if parsed is None:
        return []

    new_records = []
    for fields in parsed:
        record = TacticRecord(
            id=state.next_tactic_id(),
            generated_at_iteration=state.iteration,
            **fields,
        )
        state.tactics.append(record)
        new_records.append(record)

    first = new_records[0]
    first.status = TACTIC_ACTIVE
    state.active_tactic_id = first.id
    return new_records


def tactic_step(state: GlobalState, child_improved: bool) -> list[str]:
    """Record one trial against the active tactic and rotate it when spent.

    Returns human-readable lifecycle events for the run log.
    """
    tactic = state.active_tactic()
    if tactic is None:
        return []

    events = []
    tactic.trials += 1
    if child_improved:
        tactic.improvements_attributed += 1
        tactic.trials_since_improvement = 0
    else:
        tactic.trials_since_improvement += 1
        if tactic.trials_since_improvement >= state.config.tactic_patience:
            tactic.status = TACTIC_EXHAUSTED
            events.append(f"exhausted:{tactic.id}")
            successor = next((t for t in state.tactics if t.status == TACTIC_FRESH), None)
            if successor is not None:
                successor.status = TACTIC_ACTIVE
                state.active_tactic_id = successor.id
                events.append(f"activated:{successor.id}")
            else:
                state.active_tactic_id = None
    return events
