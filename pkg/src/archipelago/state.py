"""Domain types shared across the engine, plus checkpoint/restore.

All mutation of a GlobalState happens through the engine's serialized
iteration loop; these types carry no behavior beyond construction,
validation, and serialization.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .config import ConfigError, RunConfig, to_internal

CHECKPOINT_SCHEMA = "archipelago-checkpoint"
CHECKPOINT_VERSION = 1

# Provenance of a program record.
MODE_EXPLORATION = "exploration"
MODE_EXPLOITATION = "exploitation"
MODE_SEED = "seed"
MODE_MIGRANT = "migrant"

TACTIC_FRESH = "fresh"
TACTIC_ACTIVE = "active"
TACTIC_EXHAUSTED = "exhausted"


class CheckpointError(ValueError):
    """A snapshot could not be restored."""


class StateError(RuntimeError):
    """A GlobalState invariant was violated."""


@dataclass
class ProgramRecord:
    """One evolved candidate program."""

    id: str
    source: str
    fitness: float                  # internal maximize convention; always finite
    metrics: dict[str, float]       # raw evaluator output
    parent_id: str | None
    island_origin: int
    iteration_created: int
    mode: str
    tactic_id: str | None = None


@dataclass
class AdaptiveSignals:
    """Per-island adaptive state.

    ``improvement_signal`` is an EMA of squared normalized improvements and
    therefore stays >= 0. ``decayed_reward`` / ``decayed_visits`` feed the
    bandit; ``visits`` is the raw monotone visit count.
    """

    improvement_signal: float = 0.0
    local_best: float = 0.0
    decayed_reward: float = 0.0
    decayed_visits: float = 0.0
    visits: int = 0


@dataclass
class IslandState:
    index: int
    archive: list[ProgramRecord]
    signals: AdaptiveSignals
    created_at_iteration: int = 0


@dataclass
class TacticRecord:
    """A meta-guidance strategy and its observed lifecycle."""

    id: str
    idea: str
    description: str
    what_to_optimize: str
    cautions: str
    approach_type: str
    status: str = TACTIC_FRESH
    trials: int = 0
    improvements_attributed: int = 0
    generated_at_iteration: int = 0
    trials_since_improvement: int = 0


@dataclass
class GlobalState:
    islands: list[IslandState]
    global_best_fitness: float
    global_best_id: str
    iteration: int
    total_visits: int
    tactics: list[TacticRecord]
    active_tactic_id: str | None
    rng_seed: int
    config: RunConfig
    # Plumbing carried for deterministic resume.
    rng_state: list | None = None
    last_spawn_iteration: int | None = None
    round_robin_cursor: int = 0
    evolution_calls: int = 0
    tactic_calls: int = 0
    next_record_seq: int = 0
    next_tactic_seq: int = 0

    def next_record_id(self) -> str:
        rid = f"prog-{self.next_record_seq:06d}"
        self.next_record_seq += 1
        return rid

    def next_tactic_id(self) -> str:
        tid = f"tactic-{self.next_tactic_seq:04d}"
        self.next_tactic_seq += 1
        return tid

    def find_record(self, record_id: str) -> ProgramRecord | None:
        for island in self.islands:
            for record in island.archive:
                if record.id == record_id:
                    return record
        return None

    def best_record(self) -> ProgramRecord:
        record = self.find_record(self.global_best_id)
        if record is None:
            raise StateError(f"global best id {self.global_best_id!r} not found in any archive")
        return record

    def active_tactic(self) -> TacticRecord | None:
        if self.active_tactic_id is None:
            return None
        for tactic in self.tactics:
            if tactic.id == self.active_tactic_id:
                return tactic
        raise StateError(f"active tactic id {self.active_tactic_id!r} not in tactic list")


def new_run(seed_program: str, config: RunConfig, seed_fitness: float) -> GlobalState:
    """Build the initial state: K islands, each seeded with the same program.

    ``seed_fitness`` is the raw evaluator score; minimize objectives are
    negated here so everything downstream is maximize-only.
    """
    config.validate()
    if not math.isfinite(seed_fitness):
        raise ConfigError(f"seed fitness must be finite, got {seed_fitness}")

    internal = to_internal(seed_fitness, config.objective_sense)
    island_count = config.fixed_island_count or config.initial_islands

    state = GlobalState(
        islands=[],
        global_best_fitness=internal,
        global_best_id="",
        iteration=0,
        total_visits=0,
        tactics=[],
        active_tactic_id=None,
        rng_seed=config.seed,
        config=config,
    )
    for k in range(island_count):
        seed_record = ProgramRecord(
            id=state.next_record_id(),
            source=seed_program,
            fitness=internal,
            metrics={config.primary_metric: seed_fitness},
            parent_id=None,
            island_origin=k,
            iteration_created=0,
            mode=MODE_SEED,
        )
        state.islands.append(
            IslandState(index=k, archive=[seed_record], signals=AdaptiveSignals(local_best=internal))
        )
    state.global_best_id = state.islands[0].archive[0].id
    check_invariants(state)
    return state


def check_invariants(state: GlobalState) -> None:
    """Assert the cross-cutting GlobalState invariants; called every iteration."""
    if not state.islands:
        raise StateError("state has no islands")
    best = max(island.signals.local_best for island in state.islands)
    if state.global_best_fitness != best:
        raise StateError(
            f"global best {state.global_best_fitness} != max local best {best}"
        )
    visits = sum(island.signals.visits for island in state.islands)
    if state.total_visits != visits:
        raise StateError(f"total visits {state.total_visits} != sum of island visits {visits}")
    for island in state.islands:
        if not island.archive:
            raise StateError(f"island {island.index} has an empty archive")
        if island.signals.improvement_signal < 0:
            raise StateError(f"island {island.index} has negative improvement signal")
        for record in island.archive:
            if not math.isfinite(record.fitness):
                raise StateError(f"record {record.id} has non-finite fitness")


def checkpoint(state: GlobalState, context: dict | None = None) -> bytes:
    """Serialize the full state to a self-describing snapshot.

    ``context`` is an optional free-form section (problem spec, evaluator
    reference, ...) that `restore` ignores; `read_context` retrieves it.
    """
    payload = {
        "schema": CHECKPOINT_SCHEMA,
        "schema_version": CHECKPOINT_VERSION,
        "state": _state_to_dict(state),
    }
    if context:
        payload["context"] = context
    return json.dumps(payload, sort_keys=True).encode("utf-8")


def read_context(snapshot: bytes) -> dict:
    """Return the free-form context section of a snapshot ({} when absent)."""
    try:
        payload = json.loads(snapshot.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"snapshot is not valid checkpoint JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise CheckpointError("snapshot is not a checkpoint object")
    context = payload.get("context", {})
    return context if isinstance(context, dict) else {}


def restore(snapshot: bytes) -> GlobalState:
    """Rebuild a GlobalState from `checkpoint` output.

    Continuing a restored state with the same operator and evaluator
    reproduces the original trajectory exactly.
    """
    try:
        payload = json.loads(snapshot.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"snapshot is not valid checkpoint JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("schema") != CHECKPOINT_SCHEMA:
        raise CheckpointError(
            f"not an {CHECKPOINT_SCHEMA} snapshot (schema={payload.get('schema') if isinstance(payload, dict) else None!r})"
        )
    version = payload.get("schema_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported snapshot version {version!r}; this build reads version {CHECKPOINT_VERSION}"
        )
    try:
        state = _state_from_dict(payload["state"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"snapshot (version {version}) is corrupt: {exc}") from exc
    check_invariants(state)
    return state


def _state_to_dict(state: GlobalState) -> dict:
    data = asdict(state)
    data["config"] = state.config.to_dict()
    return data


def _state_from_dict(data: dict) -> GlobalState:
    config = RunConfig.from_dict(data["config"])
    islands = [
        IslandState(
            index=isl["index"],
            archive=[ProgramRecord(**rec) for rec in isl["archive"]],
            signals=AdaptiveSignals(**isl["signals"]),
            created_at_iteration=isl["created_at_iteration"],
        )
        for isl in data["islands"]
    ]
    tactics = [TacticRecord(**t) for t in data["tactics"]]
    return GlobalState(
        islands=islands,
        global_best_fitness=data["global_best_fitness"],
        global_best_id=data["global_best_id"],
        iteration=data["iteration"],
        total_visits=data["total_visits"],
        tactics=tactics,
        active_tactic_id=data["active_tactic_id"],
        rng_seed=data["rng_seed"],
        config=config,
        rng_state=data.get("rng_state"),
        last_spawn_iteration=data.get("last_spawn_iteration"),
        round_robin_cursor=data.get("round_robin_cursor", 0),
        evolution_calls=data.get("evolution_calls", 0),
        tactic_calls=data.get("tactic_calls", 0),
        next_record_seq=data["next_record_seq"],
        next_tactic_seq=data["next_tactic_seq"],
    )
