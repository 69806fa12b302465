"""Background run jobs for the HTTP service.

Each job owns one engine in a worker thread; the registry hands out
read-only progress snapshots. State files (event log, checkpoints) live
under <data_dir>/<run_id>/ and are the source of truth for artifacts.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..config import ConfigError, RunConfig, to_raw
from ..engine import Engine
from ..evaluation import (
    STATUS_OK,
    evaluate,
    evaluator_source_text,
    resolve_evaluator,
)
from ..operators import HttpChatOperator, MockScriptOperator
from ..state import GlobalState, new_run, read_context, restore

STATUS_QUEUED = "queued"
STATUS_RUNNING = "running"
STATUS_COMPLETED = "completed"
STATUS_CANCELLED = "cancelled"
STATUS_FAILED = "failed"


class JobError(RuntimeError):
    pass


class RunJob:
    def __init__(self, run_id: str, out_dir: Path, submission: dict):
        self.run_id = run_id
        self.out_dir = out_dir
        self.submission = submission
        self.status = STATUS_QUEUED
        self.error: str | None = None
        self.progress: dict = {}
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------

    def start(self, state: GlobalState, operator, spec, problem_spec: str, context: dict) -> None:
        self._stop.clear()
        self.status = STATUS_RUNNING
        self._thread = threading.Thread(
            target=self._work,
            args=(state, operator, spec, problem_spec, context),
            daemon=True,
        )
        self._thread.start()

    def _work(self, state, operator, spec, problem_spec, context) -> None:
        try:
            engine = Engine(
                state,
                operator,
                spec,
                out_dir=self.out_dir,
                problem_spec=problem_spec,
                evaluator_source=evaluator_source_text(context.get("evaluator", "")),
                checkpoint_context=context,
                should_stop=self._stop.is_set,
                on_iteration=self._on_iteration,
            )
            final_state, best = engine.run()
            (self.out_dir / "best_program.txt").write_text(best.source, encoding="utf-8")
            with self._lock:
                self.status = STATUS_CANCELLED if engine.stopped_early else STATUS_COMPLETED
        except Exception as exc:
            with self._lock:
                self.status = STATUS_FAILED
                self.error = f"{type(exc).__name__}: {exc}"

    def _on_iteration(self, row: dict) -> None:
        with self._lock:
            self.progress = {
                "iteration": row["iteration"],
                "global_best": row["global_best"],
                "island_count": row["island_count"],
                "visits_per_island": row["visits_per_island"],
                "improvements": self.progress.get("improvements", 0) + (1 if row["improved"] else 0),
                "tactic_calls": row["tactic_calls"],
            }

    def cancel(self) -> None:
        self._stop.set()

    def is_running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "run_id": self.run_id,
                "status": self.status,
                "error": self.error,
                **self.progress,
            }

    # -- artifacts ---------------------------------------------------------

    def latest_checkpoint(self) -> Path | None:
        final = self.out_dir / "checkpoint-final.json"
        numbered = sorted((self.out_dir / "checkpoints").glob("checkpoint-*.json"))
        candidates = ([final] if final.exists() else []) + numbered[-1:]
        if not candidates:
            return None
        return max(candidates, key=lambda p: p.stat().st_mtime)

    def read_events(self, offset: int, limit: int) -> tuple[list[dict], int]:
        log = self.out_dir / "run.jsonl"
        if not log.exists():
            return [], 0
        lines = [line for line in log.read_text(encoding="utf-8").splitlines() if line.strip()]
        rows = [json.loads(line) for line in lines]
        return rows[offset : offset + limit], len(rows)


class JobRegistry:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._jobs: dict[str, RunJob] = {}
        self._seq = 0
        self._lock = threading.Lock()

    def list_jobs(self) -> list[RunJob]:
        with self._lock:
            return list(self._jobs.values())

    def get(self, run_id: str) -> RunJob:
        with self._lock:
            job = self._jobs.get(run_id)
        if job is None:
            raise KeyError(run_id)
        return job

    def submit(self, submission: dict) -> RunJob:
        with self._lock:
            self._seq += 1
            run_id = f"run-{self._seq:04d}"
            job = RunJob(run_id, self.data_dir / run_id, submission)
            self._jobs[run_id] = job

        config = RunConfig.from_dict(dict(submission.get("config") or {}))
        config.model_name = submission["model"]
        config.budget = submission["iterations"]
        config.seed = submission.get("seed", 0)
        config.validate()

        spec = resolve_evaluator(submission["evaluator"], config)
        spec.validate()
        operator = _build_operator(submission, config)

        seed_program = submission["seed_program"]
        seed_result = evaluate(seed_program, spec)
        if seed_result.status == STATUS_OK:
            seed_fitness = seed_result.metrics[config.primary_metric]
        else:
            seed_fitness = to_raw(config.sentinel_fitness, config.objective_sense)

        state = new_run(seed_program, config, seed_fitness)
        if seed_result.status == STATUS_OK:
            for island in state.islands:
                island.archive[0].metrics = dict(seed_result.metrics)

        context = {
            "problem_spec": submission.get("problem_spec", ""),
            "evaluator": submission["evaluator"],
            "timeout": spec.timeout,
        }
        job.start(state, operator, spec, context["problem_spec"], context)
        return job

    def resume(self, run_id: str, iterations: int) -> RunJob:
        job = self.get(run_id)
        if job.is_running():
            raise JobError(f"run {run_id} is still active")
        snapshot_path = job.latest_checkpoint()
        if snapshot_path is None:
            raise JobError(f"run {run_id} has no checkpoint to resume from")

        snapshot = snapshot_path.read_bytes()
        state = restore(snapshot)
        context = read_context(snapshot)
        if iterations < state.iteration:
            raise ConfigError(
                f"budget {iterations} is below the checkpoint iteration {state.iteration}"
            )
        state.config.budget = iterations

        spec = resolve_evaluator(context["evaluator"], state.config)
        spec.validate()
        operator = _build_operator(job.submission, state.config)
        job.error = None
        job.start(state, operator, spec, context.get("problem_spec", ""), context)
        return job


def _build_operator(submission: dict, config: RunConfig):
    if submission.get("mock_responses") is not None:
        return MockScriptOperator(submission["mock_responses"], submission.get("mock_default"))
    return HttpChatOperator(model=config.model_name)
