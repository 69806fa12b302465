"""Evaluator harness: in-process and subprocess protocol, failure isolation."""

from __future__ import annotations

import stat
import sys
import textwrap
from pathlib import Path

import pytest

from archipelago.evaluation import (
    SCRATCH_DIR_ENV,
    STATUS_CRASH,
    STATUS_INVALID,
    STATUS_OK,
    STATUS_TIMEOUT,
    EvaluatorConfigError,
    EvaluatorSpec,
    evaluate,
    resolve_evaluator,
)
from archipelago.config import RunConfig
from archipelago.toys import quadratic_evaluator, value_evaluator


def write_script(tmp_path: Path, body: str, name: str = "evaluator.py") -> Path:
    path = tmp_path / name
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return path


class TestInProcess:
    def test_quadratic_optimum(self):
        spec = EvaluatorSpec(func=quadratic_evaluator)
        result = evaluate("x = 3.0", spec)
        assert result.status == STATUS_OK
        assert result.fitness == 0.0
        assert result.metrics["x"] == 3.0

    def test_callable_exception_is_crash(self):
        spec = EvaluatorSpec(func=quadratic_evaluator, sentinel=-1e18)
        result = evaluate("no numbers here", spec)
        assert result.status == STATUS_CRASH
        assert result.fitness == -1e18

    def test_non_mapping_output_invalid(self):
        spec = EvaluatorSpec(func=lambda s: [1, 2, 3])
        assert evaluate("x", spec).status == STATUS_INVALID

    def test_nan_primary_metric_invalid(self):
        spec = EvaluatorSpec(func=lambda s: {"combined_score": float("nan")})
        result = evaluate("x", spec)
        assert result.status == STATUS_INVALID
        assert result.fitness == spec.sentinel

    def test_missing_primary_metric_invalid(self):
        spec = EvaluatorSpec(func=lambda s: {"other": 1.0})
        assert evaluate("x", spec).status == STATUS_INVALID

    def test_deterministic(self):
        spec = EvaluatorSpec(func=quadratic_evaluator)
        a = evaluate("x = 2.5", spec)
        b = evaluate("x = 2.5", spec)
        assert (a.fitness, a.metrics) == (b.fitness, b.metrics)


class TestSubprocessProtocol:
    def test_happy_path_reads_candidate_argument(self, tmp_path):
        script = write_script(
            tmp_path,
            """
            import json, sys
            text = open(sys.argv[1]).read()
            value = float(text.split()[-1])
            print(json.dumps({"combined_score": value, "length": len(text)}))
            """,
        )
        spec = EvaluatorSpec(script=script)
        result = evaluate("score: 4.25", spec)
        assert result.status == STATUS_OK
        assert result.fitness == 4.25
        assert result.metrics["length"] == float(len("score: 4.25"))

    def test_scratch_dir_env_is_set(self, tmp_path):
        script = write_script(
            tmp_path,
            f"""
            import json, os
            scratch = os.environ["{SCRATCH_DIR_ENV}"]
            print(json.dumps({{"combined_score": 1.0, "has_scratch": float(os.path.isdir(scratch))}}))
            """,
        )
        result = evaluate("x", EvaluatorSpec(script=script))
        assert result.metrics["has_scratch"] == 1.0

    def test_nonzero_exit_is_crash(self, tmp_path):
        script = write_script(tmp_path, "import sys; sys.exit(3)")
        result = evaluate("x", EvaluatorSpec(script=script))
        assert result.status == STATUS_CRASH
        assert result.fitness == EvaluatorSpec(script=script).sentinel

    def test_timeout_kills_process_tree(self, tmp_path):
        script = write_script(
            tmp_path,
            """
            import time
            time.sleep(30)
            """,
        )
        spec = EvaluatorSpec(script=script, timeout=0.5)
        result = evaluate("x", spec)
        assert result.status == STATUS_TIMEOUT
        assert result.fitness == spec.sentinel
        assert result.duration < 5.0

    def test_unparseable_stdout_invalid(self, tmp_path):
        script = write_script(tmp_path, "print('this is not json')")
        assert evaluate("x", EvaluatorSpec(script=script)).status == STATUS_INVALID

    def test_json_on_last_line_accepted(self, tmp_path):
        script = write_script(
            tmp_path,
            """
            import json
            print("progress: working")
            print(json.dumps({"combined_score": 2.0}))
            """,
        )
        assert evaluate("x", EvaluatorSpec(script=script)).fitness == 2.0

    def test_minimize_sense_negated_internally(self, tmp_path):
        script = write_script(
            tmp_path,
            """
            import json
            print(json.dumps({"combined_score": 640.5}))
            """,
        )
        spec = EvaluatorSpec(script=script, sense="minimize")
        result = evaluate("x", spec)
        assert result.fitness == -640.5
        assert result.metrics["combined_score"] == 640.5  # raw metrics stay raw

    def test_executable_script_without_known_suffix(self, tmp_path):
        script = tmp_path / "evaluator"
        script.write_text(
            f"#!{sys.executable}\nimport json\nprint(json.dumps({{'combined_score': 7.0}}))\n"
        )
        script.chmod(script.stat().st_mode | stat.S_IXUSR)
        assert evaluate("x", EvaluatorSpec(script=script)).fitness == 7.0


class TestValidation:
    def test_needs_exactly_one_backend(self):
        with pytest.raises(EvaluatorConfigError):
            EvaluatorSpec().validate()
        with pytest.raises(EvaluatorConfigError):
            EvaluatorSpec(func=value_evaluator, script=Path("x.py")).validate()

    def test_missing_script_rejected(self, tmp_path):
        with pytest.raises(EvaluatorConfigError):
            EvaluatorSpec(script=tmp_path / "absent.py").validate()

    def test_resolve_builtin(self):
        spec = resolve_evaluator("builtin:quadratic", RunConfig())
        spec.validate()
        assert spec.func is quadratic_evaluator

    def test_resolve_unknown_builtin(self):
        with pytest.raises(EvaluatorConfigError):
            resolve_evaluator("builtin:nope", RunConfig())

    def test_resolve_script_path(self, tmp_path):
        script = write_script(tmp_path, "print('{}')")
        spec = resolve_evaluator(str(script), RunConfig(eval_timeout=5.0))
        spec.validate()
        assert spec.timeout == 5.0
