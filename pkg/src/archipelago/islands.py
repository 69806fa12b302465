"""Archives, parent/inspiration sampling, ring migration, spawning, stagnation.

All mutations here are invoked from the engine's serialized loop.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass

from .adaptation import SearchMode, normalized_improvement, update_signal
from .state import (
    MODE_EXPLORATION,
    MODE_MIGRANT,
    MODE_SEED,
    AdaptiveSignals,
    GlobalState,
    IslandState,
    ProgramRecord,
)

_TOKEN_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class MigrationEvent:
    source_island: int
    target_island: int
    source_record_id: str
    migrant_id: str
    fitness: float
    improved_receiver: bool


def sample_parent(
    archive: list[ProgramRecord],
    mode: SearchMode,
    rng: random.Random,
    inspiration_count: int = 3,
    sentinel_fitness: float = -1e18,
) -> tuple[ProgramRecord, list[ProgramRecord]]:
    """Pick a parent and its inspiration set for one mutation.

    Exploration draws the parent uniformly and ranks inspirations by textual
    dissimilarity from it (farthest first). Exploitation draws uniformly from
    the top fitness quartile (ceil(|archive|/4), min 1) and takes the
    highest-fitness records as inspirations. Failed (sentinel) records are
    never exploitation parents while any healthy record exists.
    """
    if not archive:
        raise ValueError("cannot sample from an empty archive")

    if mode.mode == MODE_EXPLORATION:
        parent = rng.choice(archive)
        others = [r for r in archive if r.id != parent.id]
        ranked = sorted(
            range(len(others)),
            key=lambda i: (-_token_set_distance(parent.source, others[i].source), i),
        )
        count = min(inspiration_count, len(archive) - 1)
        inspirations = [others[i] for i in ranked[:count]]
    else:
        healthy = [r for r in archive if r.fitness > sentinel_fitness]
        pool = healthy if healthy else list(archive)
        pool.sort(key=lambda r: -r.fitness)
        quartile = min(max(1, math.ceil(len(archive) / 4)), len(pool))
        parent = rng.choice(pool[:quartile])
        others = sorted(
            (r for r in archive if r.id != parent.id),
            key=lambda r: -r.fitness,
        )
        count = min(inspiration_count, len(archive) - 1)
        inspirations = others[:count]

    return parent, inspirations


def _token_set_distance(a: str, b: str) -> float:
    """Jaccard dissimilarity over word tokens; cheap and deterministic."""
    ta = set(_TOKEN_RE.findall(a.lower()))
    tb = set(_TOKEN_RE.findall(b.lower()))
    union = ta | tb
    if not union:
        return 0.0
    return 1.0 - len(ta & tb) / len(union)


def add_program(island: IslandState, record: ProgramRecord, max_size: int | None = None) -> None:
    """Append a record to the island's archive.

    Does not touch adaptive signals; that is the state-update step's job.
    With a size cap, the worst-fitness record is evicted, but never the
    archive's current best.
    """
    if any(r.id == record.id for r in island.archive):
        raise ValueError(f"duplicate record id {record.id!r} in island {island.index}")
    island.archive.append(record)
    if max_size is not None and len(island.archive) > max_size:
        best_idx = max(range(len(island.archive)), key=lambda i: island.archive[i].fitness)
        worst_idx = min(
            (i for i in range(len(island.archive)) if i != best_idx),
            key=lambda i: island.archive[i].fitness,
        )
        island.archive.pop(worst_idx)


def migrate(state: GlobalState) -> list[MigrationEvent]:
    """Ring migration: each island copies its best programs to its successor.

    A migrant that beats the receiver's local best raises the receiver's
    best and improvement signal (so intensity adapts), but the receiver's
    bandit statistics are untouched: it did not generate the improvement.
    Copies carry mode=migrant and point at the source record.
    """
    k = len(state.islands)
    if k < 2:
        return []

    config = state.config
    # Snapshot senders first so one migration event cannot cascade around the ring.
    outgoing: list[tuple[int, int, list[ProgramRecord]]] = []
    for island in state.islands:
        best = sorted(island.archive, key=lambda r: -r.fitness)[: config.migration_count]
        outgoing.append((island.index, (island.index + 1) % k, best))

    events: list[MigrationEvent] = []
    for source_idx, target_idx, records in outgoing:
        target = state.islands[target_idx]
        existing_sources = {r.source for r in target.archive}
        for record in records:
            if record.source in existing_sources:
                continue
            migrant = ProgramRecord(
                id=state.next_record_id(),
                source=record.source,
                fitness=record.fitness,
                metrics=dict(record.metrics),
                parent_id=record.id,
                island_origin=record.island_origin,
                iteration_created=state.iteration,
                mode=MODE_MIGRANT,
                tactic_id=record.tactic_id,
            )
            add_program(target, migrant, config.archive_max_size)
            existing_sources.add(migrant.source)
            improved = migrant.fitness > target.signals.local_best
            if improved:
                delta = normalized_improvement(
                    migrant.fitness, target.signals.local_best, config.epsilon
                )
                target.signals.improvement_signal = update_signal(
                    target.signals.improvement_signal, delta, config.decay
                )
                target.signals.local_best = migrant.fitness
            events.append(
                MigrationEvent(
                    source_island=source_idx,
                    target_island=target_idx,
                    source_record_id=record.id,
                    migrant_id=migrant.id,
                    fitness=migrant.fitness,
                    improved_receiver=improved,
                )
            )
    return events


def warmup_passed(state: GlobalState) -> bool:
    """The stagnation predicates are meaningless before the engine has history.

    The improvement signal starts at 0, which sits below every threshold, so
    both predicates would fire on iteration one without this grace period.
    """
    config = state.config
    if state.iteration < config.warmup_iterations:
        return False
    return all(island.signals.visits >= config.warmup_min_visits for island in state.islands)


def check_spawn(state: GlobalState) -> bool:
    """True when every live island has stalled below the spawn threshold."""
    config = state.config
    if not config.dynamic_spawning or config.fixed_island_count is not None:
        return False
    if not warmup_passed(state):
        return False
    if (
        state.last_spawn_iteration is not None
        and state.iteration - state.last_spawn_iteration < config.effective_spawn_cooldown
    ):
        return False
    return all(
        island.signals.improvement_signal <= config.spawn_threshold for island in state.islands
    )


def spawn_island(state: GlobalState, rng: random.Random) -> IslandState:
    """Append a fresh island seeded from the union of all archives."""
    candidates = [record for island in state.islands for record in island.archive]
    source = rng.choice(candidates)
    index = len(state.islands)
    seed = ProgramRecord(
        id=state.next_record_id(),
        source=source.source,
        fitness=source.fitness,
        metrics=dict(source.metrics),
        parent_id=source.id,
        island_origin=source.island_origin,
        iteration_created=state.iteration,
        mode=MODE_SEED,
        tactic_id=source.tactic_id,
    )
    island = IslandState(
        index=index,
        archive=[seed],
        signals=AdaptiveSignals(local_best=seed.fitness),
        created_at_iteration=state.iteration,
    )
    state.islands.append(island)
    state.last_spawn_iteration = state.iteration
    return island


def globally_stagnant(state: GlobalState) -> bool:
    """True when every live island sits at or below the meta-guidance threshold."""
    if not warmup_passed(state):
        return False
    return all(
        island.signals.improvement_signal <= state.config.meta_threshold
        for island in state.islands
    )
