"""Shared test helpers and the acceptance-criterion summary hook."""

from __future__ import annotations

import random

import pytest

from archipelago.config import RunConfig
from archipelago.state import AdaptiveSignals, GlobalState, IslandState, ProgramRecord, new_run

_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def record_criterion(name: str, passed: bool = True) -> None:
    _ACCEPTANCE_RESULTS.append((name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}: {name}")


# -- state builders ----------------------------------------------------------


def quick_config(**overrides) -> RunConfig:
    defaults = dict(budget=10, initial_islands=2, model_name="mock")
    defaults.update(overrides)
    return RunConfig(**defaults)


def fresh_state(seed_fitness: float = 1.0, **overrides) -> GlobalState:
    return new_run("x = 1.0", quick_config(**overrides), seed_fitness)


def make_record(
    rid: str,
    fitness: float,
    source: str | None = None,
    island: int = 0,
    **kwargs,
) -> ProgramRecord:
    defaults = dict(
        metrics={"combined_score": fitness},
        parent_id=None,
        island_origin=island,
        iteration_created=0,
        mode="seed",
    )
    defaults.update(kwargs)
    return ProgramRecord(id=rid, source=source if source is not None else f"src {rid}", fitness=fitness, **defaults)


def make_island(index: int, fitnesses: list[float], signal: float = 0.0, visits: int = 0) -> IslandState:
    archive = [make_record(f"i{index}-r{j}", f, island=index) for j, f in enumerate(fitnesses)]
    signals = AdaptiveSignals(
        improvement_signal=signal,
        local_best=max(fitnesses),
        decayed_reward=0.0,
        decayed_visits=float(min(visits, 1)) if visits else 0.0,
        visits=visits,
    )
    return IslandState(index=index, archive=archive, signals=signals)


def synthetic_state(
    island_fitnesses: list[list[float]],
    signals: list[float] | None = None,
    iteration: int = 50,
    visits_each: int = 10,
    **config_overrides,
) -> GlobalState:
    """A hand-built multi-island state that satisfies the global invariants."""
    config = quick_config(**config_overrides)
    islands = []
    for idx, fitnesses in enumerate(island_fitnesses):
        island = make_island(idx, fitnesses, visits=visits_each)
        if signals is not None:
            island.signals.improvement_signal = signals[idx]
        island.signals.decayed_visits = float(visits_each)
        islands.append(island)
    best_island = max(islands, key=lambda i: i.signals.local_best)
    best_record = max(best_island.archive, key=lambda r: r.fitness)
    return GlobalState(
        islands=islands,
        global_best_fitness=best_island.signals.local_best,
        global_best_id=best_record.id,
        iteration=iteration,
        total_visits=visits_each * len(islands),
        tactics=[],
        active_tactic_id=None,
        rng_seed=0,
        config=config,
        next_record_seq=10_000,
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)
