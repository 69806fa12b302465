"""CLI surface: flags, exit codes, out-dir layout, resume, report."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from archipelago.cli import main
from archipelago.reporting import load_events

def write_inputs(tmp_path: Path, budget: int = 12, improving: bool = True) -> dict:
    seed = tmp_path / "seed.py"
    seed.write_text("value = 1.0\n")
    spec = tmp_path / "problem.md"
    spec.write_text("maximize the value\n")
    if improving:
        responses = {
            f"iter:{t}": f"```\nvalue = {float(1 + t)!r}\n```" for t in range(1, budget + 1)
        }
    else:
        responses = {}
    script = tmp_path / "mock.json"
    script.write_text(json.dumps({"responses": responses, "default": "```\nvalue = 0.5\n```"}))
    return {
        "seed": seed,
        "spec": spec,
        "script": script,
        "out": tmp_path / "out",
    }


def run_cli(tmp_path: Path, extra: list[str] | None = None, budget: int = 12) -> tuple[int, dict]:
    inputs = write_inputs(tmp_path, budget=budget)
    argv = [
        "run",
        "--model", "mock",
        "--iterations", str(budget),
        "--seed-program", str(inputs["seed"]),
        "--evaluator", "builtin:value",
        "--problem-spec", str(inputs["spec"]),
        "--mock-script", str(inputs["script"]),
        "--out-dir", str(inputs["out"]),
        "--seed", "4",
    ] + (extra or [])
    return main(argv), inputs


class TestRunCommand:
    def test_missing_required_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", "--model", "m", "--iterations", "5"])
        assert excinfo.value.code == 2

    def test_unknown_builtin_evaluator_exits_3(self, tmp_path):
        inputs = write_inputs(tmp_path)
        code = main([
            "run", "--model", "mock", "--iterations", "3",
            "--seed-program", str(inputs["seed"]),
            "--evaluator", "builtin:missing",
            "--problem-spec", str(inputs["spec"]),
            "--mock-script", str(inputs["script"]),
            "--out-dir", str(inputs["out"]),
        ])
        assert code == 3

    def test_missing_evaluator_script_exits_3(self, tmp_path):
        inputs = write_inputs(tmp_path)
        code = main([
            "run", "--model", "mock", "--iterations", "3",
            "--seed-program", str(inputs["seed"]),
            "--evaluator", str(tmp_path / "nope.py"),
            "--problem-spec", str(inputs["spec"]),
            "--mock-script", str(inputs["script"]),
            "--out-dir", str(inputs["out"]),
        ])
        assert code == 3

    def test_unknown_config_key_exits_2(self, tmp_path):
        inputs = write_inputs(tmp_path)
        config = tmp_path / "unknown.json"
        config.write_text(json.dumps({"not_a_field": 1}))
        code = main([
            "run", "--model", "mock", "--iterations", "3",
            "--seed-program", str(inputs["seed"]),
            "--evaluator", "builtin:value",
            "--problem-spec", str(inputs["spec"]),
            "--mock-script", str(inputs["script"]),
            "--config", str(config),
            "--out-dir", str(inputs["out"]),
        ])
        assert code == 2

    def test_bad_config_exits_2(self, tmp_path):
        inputs = write_inputs(tmp_path)
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"intensity_min": 0.9}))  # > intensity_max
        code = main([
            "run", "--model", "mock", "--iterations", "3",
            "--seed-program", str(inputs["seed"]),
            "--evaluator", "builtin:value",
            "--problem-spec", str(inputs["spec"]),
            "--mock-script", str(inputs["script"]),
            "--config", str(config),
            "--out-dir", str(inputs["out"]),
        ])
        assert code == 2

    def test_successful_run_writes_outputs(self, tmp_path, capsys):
        code, inputs = run_cli(tmp_path)
        assert code == 0
        out = inputs["out"]
        assert (out / "run.jsonl").exists()
        assert (out / "best_program.txt").read_text() == "value = 13.0"
        assert (out / "summary.txt").exists()
        assert (out / "checkpoint-final.json").exists()
        assert (out / "checkpoints" / "checkpoint-000010.json").exists()

    def test_paper_constants_are_defaults_not_flags(self, tmp_path):
        code, inputs = run_cli(tmp_path)
        assert code == 0
        header, _ = load_events(inputs["out"] / "run.jsonl")
        config = header["config"]
        assert config["intensity_min"] == 0.1
        assert config["intensity_max"] == 0.7
        assert config["spawn_threshold"] == 0.02
        assert config["meta_threshold"] == 0.12
        assert config["ucb_c"] == pytest.approx(2**0.5, rel=1e-12)

    def test_fixed_islands_flag(self, tmp_path):
        code, inputs = run_cli(tmp_path, extra=["--fixed-islands", "5"])
        assert code == 0
        header, rows = load_events(inputs["out"] / "run.jsonl")
        assert header["config"]["fixed_island_count"] == 5
        assert all(row["island_count"] == 5 for row in rows)

    def test_ablation_flags_recorded(self, tmp_path):
        code, inputs = run_cli(
            tmp_path, extra=["--no-local-adaptation", "--no-bandit", "--no-meta"]
        )
        assert code == 0
        header, rows = load_events(inputs["out"] / "run.jsonl")
        assert header["config"]["local_adaptation"] is False
        assert header["config"]["bandit_selection"] is False
        assert header["config"]["meta_guidance"] is False
        assert all(row["intensity"] == 0.3 for row in rows)


class TestResumeCommand:
    def test_resume_continues_to_new_budget(self, tmp_path):
        code, inputs = run_cli(tmp_path, budget=10)
        assert code == 0
        checkpoint = inputs["out"] / "checkpoint-final.json"
        resume_out = tmp_path / "resumed"
        code = main([
            "resume", str(checkpoint),
            "--iterations", "14",
            "--mock-script", str(inputs["script"]),
            "--out-dir", str(resume_out),
        ])
        assert code == 0
        _, rows = load_events(resume_out / "run.jsonl")
        assert [r["iteration"] for r in rows] == [11, 12, 13, 14]

    def test_resume_rejects_shrunken_budget(self, tmp_path):
        code, inputs = run_cli(tmp_path, budget=10)
        code = main([
            "resume", str(inputs["out"] / "checkpoint-final.json"),
            "--iterations", "5",
            "--out-dir", str(tmp_path / "r"),
        ])
        assert code == 2

    def test_resume_corrupt_checkpoint_fails(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["resume", str(bad), "--out-dir", str(tmp_path / "r")]) == 1


class TestReportCommand:
    def test_report_renders_summary_and_series(self, tmp_path, capsys):
        code, inputs = run_cli(tmp_path)
        report_dir = tmp_path / "report"
        code = main([
            "report", str(inputs["out"] / "run.jsonl"),
            "--out-dir", str(report_dir), "--no-plots",
        ])
        assert code == 0
        assert (report_dir / "summary.txt").exists()
        series = json.loads((report_dir / "best_so_far.json").read_text())
        bests = [p["best"] for p in series]
        assert bests == sorted(bests)

    def test_report_with_plots(self, tmp_path):
        code, inputs = run_cli(tmp_path, budget=6)
        report_dir = tmp_path / "reportp"
        code = main(["report", str(inputs["out"] / "run.jsonl"), "--out-dir", str(report_dir)])
        assert code == 0
        assert (report_dir / "best_so_far.png").exists()
        assert (report_dir / "islands.png").exists()

    def test_report_on_empty_log(self, tmp_path):
        log = tmp_path / "empty.jsonl"
        log.write_text("")
        code = main(["report", str(log), "--out-dir", str(tmp_path / "rep"), "--no-plots"])
        assert code == 0
