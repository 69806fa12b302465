"""Evaluator harness: runs candidates in-process or via the subprocess protocol.

Subprocess protocol (normative):
    argv    = [evaluator_path, candidate_path]
    stdout  = a single JSON object mapping metric name -> number,
              containing at least the configured primary metric
    exit 0  = ok
The harness exports the scratch directory as ARCHIPELAGO_SCRATCH_DIR and
enforces a wall-clock timeout with a process-tree kill.

There is no security sandbox beyond the timeout and a throwaway temp
directory: candidates and evaluators run with the caller's privileges.
Only run evaluators and mutation backends you trust.
"""

from __future__ import annotations

import json
import math
import os
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .config import to_internal

SCRATCH_DIR_ENV = "ARCHIPELAGO_SCRATCH_DIR"
BUILTIN_PREFIX = "builtin:"

STATUS_OK = "ok"
STATUS_CRASH = "crash"
STATUS_TIMEOUT = "timeout"
STATUS_INVALID = "invalid_output"

_ARTIFACT_LIMIT = 4096


class EvaluatorConfigError(ValueError):
    """The evaluator specification failed startup validation."""


@dataclass
class EvaluationResult:
    fitness: float                 # internal maximize convention; sentinel on failure
    metrics: dict[str, float]      # raw evaluator output
    status: str
    duration: float
    artifacts: str | None = None


@dataclass
class EvaluatorSpec:
    """Either an in-process callable or a subprocess script, never both."""

    func: Callable[[str], dict] | None = None
    script: Path | None = None
    primary_metric: str = "combined_score"
    timeout: float = 60.0
    sense: str = "maximize"
    sentinel: float = -1e18
    env: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if (self.func is None) == (self.script is None):
            raise EvaluatorConfigError("provide exactly one of func or script")
        if self.script is not None:
            path = Path(self.script)
            if not path.is_file():
                raise EvaluatorConfigError(f"evaluator script not found: {path}")
            if _interpreter_for(path) is None and not os.access(path, os.X_OK):
                raise EvaluatorConfigError(
                    f"evaluator script {path} is neither a known interpreter type nor executable"
                )
        if self.timeout <= 0:
            raise EvaluatorConfigError("timeout must be > 0")


def _interpreter_for(path: Path) -> list[str] | None:
    suffix = path.suffix.lower()
    if suffix == ".py":
        return [sys.executable]
    if suffix in (".js", ".mjs", ".cjs"):
        return ["node"]
    return None


def evaluate(candidate_source: str, spec: EvaluatorSpec) -> EvaluationResult:
    """Score one candidate. Failures map to sentinel fitness, never exceptions."""
    start = time.monotonic()
    if spec.func is not None:
        raw, status, artifacts = _run_in_process(candidate_source, spec)
    else:
        raw, status, artifacts = _run_subprocess(candidate_source, spec)
    duration = time.monotonic() - start

    if status != STATUS_OK:
        return EvaluationResult(spec.sentinel, raw, status, duration, artifacts)

    primary = raw.get(spec.primary_metric)
    if primary is None or not math.isfinite(primary):
        return EvaluationResult(
            spec.sentinel,
            raw,
            STATUS_INVALID,
            duration,
            f"primary metric {spec.primary_metric!r} missing or non-finite",
        )
    return EvaluationResult(to_internal(primary, spec.sense), raw, STATUS_OK, duration, artifacts)


def _run_in_process(source: str, spec: EvaluatorSpec) -> tuple[dict, str, str | None]:
    try:
        output = spec.func(source)
    except Exception as exc:  # candidate/evaluator errors must not abort the run
        return {}, STATUS_CRASH, f"{type(exc).__name__}: {exc}"[:_ARTIFACT_LIMIT]
    metrics = _coerce_metrics(output)
    if metrics is None:
        return {}, STATUS_INVALID, "evaluator did not return a name->number mapping"
    return metrics, STATUS_OK, None


def _run_subprocess(source: str, spec: EvaluatorSpec) -> tuple[dict, str, str | None]:
    with tempfile.TemporaryDirectory(prefix="archipelago-eval-") as workspace:
        candidate_path = Path(workspace) / "candidate.py"
        candidate_path.write_text(source, encoding="utf-8")

        interpreter = _interpreter_for(Path(spec.script)) or []
        cmd = [*interpreter, str(spec.script), str(candidate_path)]
        env = dict(os.environ, **spec.env, **{SCRATCH_DIR_ENV: workspace})

        proc = subprocess.Popen(
            cmd,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            cwd=workspace,
            env=env,
            text=True,
            start_new_session=True,  # lets the timeout kill the whole tree
        )
        try:
            stdout, stderr = proc.communicate(timeout=spec.timeout)
        except subprocess.TimeoutExpired:
            _kill_tree(proc)
            return {}, STATUS_TIMEOUT, f"no result within {spec.timeout}s"

        if proc.returncode != 0:
            return {}, STATUS_CRASH, (stderr or stdout)[-_ARTIFACT_LIMIT:]

        metrics = _parse_stdout(stdout)
        if metrics is None:
            return {}, STATUS_INVALID, stdout[-_ARTIFACT_LIMIT:]
        return metrics, STATUS_OK, None


def _kill_tree(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass
    proc.wait()


def _parse_stdout(stdout: str) -> dict[str, float] | None:
    """Accept the whole stdout as JSON, or fall back to its last non-empty line."""
    candidates = [stdout.strip()]
    lines = [line for line in stdout.splitlines() if line.strip()]
    if lines:
        candidates.append(lines[-1])
    for text in candidates:
        try:
            return _coerce_metrics(json.loads(text))
        except (json.JSONDecodeError, TypeError):
            continue
    return None


def _coerce_metrics(output: object) -> dict[str, float] | None:
    if not isinstance(output, dict):
        return None
    metrics = {}
    for key, value in output.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            continue
        metrics[str(key)] = float(value)
    return metrics


def resolve_evaluator(ref: str, config) -> EvaluatorSpec:
    """Build an EvaluatorSpec from a CLI/service reference string.

    ``builtin:<name>`` selects an in-process toy evaluator; anything else is
    treated as a script path for the subprocess protocol.
    """
    from .toys import TOY_EVALUATORS

    common = dict(
        primary_metric=config.primary_metric,
        timeout=config.eval_timeout,
        sense=config.objective_sense,
        sentinel=config.sentinel_fitness,
    )
    if ref.startswith(BUILTIN_PREFIX):
        name = ref[len(BUILTIN_PREFIX) :]
        func = TOY_EVALUATORS.get(name)
        if func is None:
            raise EvaluatorConfigError(
                f"unknown builtin evaluator {name!r}; have: {sorted(TOY_EVALUATORS)}"
            )
        return EvaluatorSpec(func=func, **common)
    return EvaluatorSpec(script=Path(ref), **common)


def evaluator_source_text(ref: str) -> str:
    """Evaluator code shown to the tactic generator; best effort."""
    if not ref or ref.startswith(BUILTIN_PREFIX):
        return f"(builtin evaluator: {ref})" if ref else ""
    try:
        return Path(ref).read_text(encoding="utf-8")
    except OSError:
        return f"(evaluator source unavailable: {ref})"
