"""The main evolution loop: selection, sampling, mutation, evaluation, update.

One Engine owns one GlobalState and a single seeded rng stream. The rng draw
order per iteration is fixed (selection tie-breaks, then mode, then parent,
then spawn seed) so that replays and checkpoint resumes are exact.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Callable

from .adaptation import exploration_intensity, normalized_improvement, sample_mode, update_signal
from .evaluation import EvaluationResult, EvaluatorSpec, evaluate
from .islands import (
    add_program,
    check_spawn,
    globally_stagnant,
    migrate,
    sample_parent,
    spawn_island,
)
from .operators import MutationOperator, OperatorError, mutate
from .prompts import MutationRequest, build_context
from .scheduling import decay_stats, global_reward, ucb_select
from .state import GlobalState, ProgramRecord, check_invariants, checkpoint
from .tactics import generate_tactics, tactic_step

LOG_SCHEMA_VERSION = 1
STATUS_MUTATION_FAILED = "mutation_failed"


def update_state(
    state: GlobalState, island_index: int, f_child: float, child_id: str | None = None
) -> tuple[float, float]:
    """Fold one child's fitness into the adaptive state of the visited island.

    Improvement: raise the improvement signal, earn a globally normalized
    reward, promote local then global bests. Stagnation: pure signal decay,
    zero reward. Either way the visited island's decayed stats advance by one
    visit. Returns (delta, reward) for the event log.
    """
    cfg = state.config
    island = state.islands[island_index]
    signals = island.signals

    delta = 0.0
    reward = 0.0
    if f_child > signals.local_best:
        delta = normalized_improvement(f_child, signals.local_best, cfg.epsilon)
        signals.improvement_signal = update_signal(signals.improvement_signal, delta, cfg.decay)
        reward = global_reward(f_child, signals.local_best, state.global_best_fitness, cfg.epsilon)
        signals.local_best = f_child
        if f_child > state.global_best_fitness:
            state.global_best_fitness = f_child
            if child_id is not None:
                state.global_best_id = child_id
    else:
        signals.improvement_signal = update_signal(signals.improvement_signal, 0.0, cfg.decay)

    island.signals = decay_stats(signals, reward, cfg.decay)
    state.total_visits += 1
    return delta, reward


class Engine:
    """Runs a GlobalState to its budget with a given operator and evaluator."""

    def __init__(
        self,
        state: GlobalState,
        operator: MutationOperator,
        evaluator_spec: EvaluatorSpec,
        out_dir: str | Path | None = None,
        problem_spec: str = "",
        evaluator_source: str = "",
        checkpoint_context: dict | None = None,
        should_stop: Callable[[], bool] | None = None,
        on_iteration: Callable[[dict], None] | None = None,
    ):
        evaluator_spec.validate()
        self.state = state
        self.operator = operator
        self.evaluator_spec = evaluator_spec
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.problem_spec = problem_spec
        self.evaluator_source = evaluator_source
        self.checkpoint_context = checkpoint_context or {}
        self.should_stop = should_stop
        self.on_iteration = on_iteration

        self.events: list[dict] = []
        self.evaluation_count = 0
        self.total_eval_seconds = 0.0
        self.stopped_early = False

        self.rng = random.Random()
        if state.rng_state is not None:
            self.rng.setstate(_thaw_rng(state.rng_state))
        else:
            self.rng.seed(state.rng_seed)

        self._log_file = None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / "checkpoints").mkdir(exist_ok=True)

    @property
    def log_path(self) -> Path | None:
        return self.out_dir / "run.jsonl" if self.out_dir is not None else None

    def run(self) -> tuple[GlobalState, ProgramRecord]:
        """Execute iterations until the budget or a stop request, then checkpoint."""
        state = self.state
        try:
            self._open_log()
            while state.iteration < state.config.budget:
                if self.should_stop is not None and self.should_stop():
                    self.stopped_early = True
                    break
                row = self._iterate()
                self.events.append(row)
                self._write_log(row)
                if state.iteration % state.config.checkpoint_interval == 0:
                    self._save_checkpoint(f"checkpoints/checkpoint-{state.iteration:06d}.json")
                if self.on_iteration is not None:
                    self.on_iteration(row)
            self._save_checkpoint("checkpoint-final.json")
        finally:
            self._close_log()
        return state, state.best_record()

    def _iterate(self) -> dict:
        state = self.state
        cfg = state.config
        rng = self.rng
        t = state.iteration + 1

        # Level 2: route this iteration's compute to an island.
        if cfg.bandit_selection:
            k = ucb_select(
                [island.signals for island in state.islands], state.total_visits, cfg.ucb_c, rng
            )
        else:
            k = state.round_robin_cursor % len(state.islands)
            state.round_robin_cursor += 1
        island = state.islands[k]

        # Level 1: intensity from the signal as of t-1, before any update.
        if cfg.local_adaptation:
            intensity = exploration_intensity(island.signals.improvement_signal, cfg)
        else:
            intensity = cfg.fixed_exploration_rate
        mode = sample_mode(intensity, rng)

        parent, inspirations = sample_parent(
            island.archive, mode, rng, cfg.inspiration_count, cfg.sentinel_fitness
        )
        tactic = state.active_tactic() if cfg.meta_guidance else None

        context = build_context(
            MutationRequest(
                parent=parent,
                inspirations=inspirations,
                mode=mode,
                tactic=tactic,
                problem_spec=self.problem_spec,
                metrics_of_parent=parent.metrics,
            )
        )

        state.evolution_calls += 1
        mutation_error: str | None = None
        try:
            child_source = mutate(self.operator, context, tag=f"iter:{t}")
        except OperatorError as exc:
            child_source = ""
            mutation_error = str(exc)

        if mutation_error is None:
            result = evaluate(child_source, self.evaluator_spec)
            self.evaluation_count += 1
            self.total_eval_seconds += result.duration
        else:
            result = EvaluationResult(cfg.sentinel_fitness, {}, STATUS_MUTATION_FAILED, 0.0)

        child = ProgramRecord(
            id=state.next_record_id(),
            source=child_source,
            fitness=result.fitness,
            metrics=result.metrics,
            parent_id=parent.id,
            island_origin=k,
            iteration_created=t,
            mode=mode.mode,
            tactic_id=tactic.id if tactic is not None else None,
        )
        add_program(island, child, cfg.archive_max_size)

        pre_update_best = island.signals.local_best
        delta, reward = update_state(state, k, child.fitness, child.id)
        improved = child.fitness > pre_update_best
        state.iteration = t

        tactic_events: list[str] = []
        if tactic is not None:
            tactic_events.extend(tactic_step(state, improved))

        # Level 3: generate fresh tactics only when stagnant with none active.
        if cfg.meta_guidance and state.active_tactic_id is None and globally_stagnant(state):
            new_tactics = generate_tactics(
                state, self.operator, self.problem_spec, self.evaluator_source
            )
            if new_tactics:
                tactic_events.append("generated:" + ",".join(rec.id for rec in new_tactics))
                tactic_events.append(f"activated:{new_tactics[0].id}")

        # Iteration-boundary duties: migration, spawning, checkpoint cadence.
        migrations = []
        if t % cfg.migration_interval == 0 and len(state.islands) >= 2:
            migrations = migrate(state)

        spawned_index = None
        if check_spawn(state):
            spawned_index = spawn_island(state, rng).index

        check_invariants(state)
        state.rng_state = _freeze_rng(rng)

        return {
            "type": "iteration",
            "iteration": t,
            "island": k,
            "mode": mode.mode,
            "intensity": intensity,
            "delta": delta,
            "reward": reward,
            "improved": improved,
            "mutation_ok": mutation_error is None,
            "child_id": child.id,
            "parent_id": parent.id,
            "child_fitness": child.fitness,
            "child_status": result.status,
            "local_best": island.signals.local_best,
            "global_best": state.global_best_fitness,
            "island_count": len(state.islands),
            "signal_per_island": [isl.signals.improvement_signal for isl in state.islands],
            "visits_per_island": [isl.signals.visits for isl in state.islands],
            "active_tactic": state.active_tactic_id,
            "tactic_events": tactic_events,
            "migrations": [
                {
                    "from": ev.source_island,
                    "to": ev.target_island,
                    "migrant_id": ev.migrant_id,
                    "source_id": ev.source_record_id,
                    "fitness": ev.fitness,
                    "improved_receiver": ev.improved_receiver,
                }
                for ev in migrations
            ],
            "spawned_island": spawned_index,
            "evolution_calls": state.evolution_calls,
            "tactic_calls": state.tactic_calls,
        }

    def _open_log(self) -> None:
        if self.out_dir is None:
            return
        path = self.log_path
        fresh = not path.exists() or path.stat().st_size == 0
        self._log_file = path.open("a", encoding="utf-8")
        if fresh:
            header = {
                "type": "header",
                "schema_version": LOG_SCHEMA_VERSION,
                "config": self.state.config.to_dict(),
                "rng_seed": self.state.rng_seed,
                "start_iteration": self.state.iteration,
                "start_global_best": self.state.global_best_fitness,
            }
            self._write_log(header)

    def _write_log(self, row: dict) -> None:
        if self._log_file is None:
            return
        self._log_file.write(json.dumps(row, sort_keys=True) + "\n")
        self._log_file.flush()

    def _close_log(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    def _save_checkpoint(self, relative: str) -> None:
        if self.out_dir is None:
            return
        snapshot = checkpoint(self.state, context=self.checkpoint_context)
        (self.out_dir / relative).write_bytes(snapshot)


def run(
    state: GlobalState,
    operator: MutationOperator,
    evaluator_spec: EvaluatorSpec,
    **kwargs,
) -> tuple[GlobalState, ProgramRecord]:
    """Convenience wrapper: build an Engine and run it to completion."""
    return Engine(state, operator, evaluator_spec, **kwargs).run()


def _freeze_rng(rng: random.Random) -> list:
    version, internal, gauss = rng.getstate()
    return [version, list(internal), gauss]


def _thaw_rng(frozen: list) -> tuple:
    version, internal, gauss = frozen
    return (version, tuple(internal), gauss)
