"""Command-line entry point.

`run` needs only the model name, iteration budget, seed program, evaluator,
and problem spec; every engine tunable has a default and can be overridden
with a JSON config file. Credentials are environment-only, never flags.

Exit codes: 0 success, 2 usage/config error, 3 evaluator validation failure.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, to_raw
from .engine import Engine
from .evaluation import (
    STATUS_OK,
    EvaluatorConfigError,
    evaluate,
    evaluator_source_text,
    resolve_evaluator,
)
from .operators import HttpChatOperator, MockScriptOperator
from .reporting import emit_report, load_events, render_plots
from .state import CheckpointError, new_run, read_context, restore

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EVALUATOR = 3


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EvaluatorConfigError as exc:
        print(f"error: evaluator validation failed: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archipelago")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="start a new evolution run")
    run_p.add_argument("--model", required=True, help="mutation-operator model name")
    run_p.add_argument("--iterations", required=True, type=int, help="total iteration budget")
    run_p.add_argument("--seed-program", required=True, help="path to the initial program")
    run_p.add_argument(
        "--evaluator", required=True, help="evaluator script path or builtin:<name>"
    )
    run_p.add_argument("--problem-spec", required=True, help="path to the problem description")
    _add_shared_run_flags(run_p)
    run_p.add_argument("--config", help="JSON file overriding any run-config field")
    run_p.add_argument("--seed", type=int, default=None, help="rng seed (default 0)")
    run_p.add_argument("--no-local-adaptation", action="store_true")
    run_p.add_argument("--no-bandit", action="store_true")
    run_p.add_argument("--no-meta", action="store_true")
    run_p.add_argument("--no-spawn", action="store_true")
    run_p.add_argument("--fixed-islands", type=int, default=None, metavar="N")
    run_p.set_defaults(handler=cmd_run)

    resume_p = sub.add_parser("resume", help="continue a run from a checkpoint")
    resume_p.add_argument("checkpoint", help="checkpoint file written by a previous run")
    resume_p.add_argument("--iterations", type=int, default=None, help="new total budget")
    resume_p.add_argument("--evaluator", help="override the checkpointed evaluator reference")
    resume_p.add_argument("--problem-spec", help="override the checkpointed problem spec path")
    _add_shared_run_flags(resume_p)
    resume_p.set_defaults(handler=cmd_resume)

    report_p = sub.add_parser("report", help="render a summary from an event log")
    report_p.add_argument("eventlog", help="run.jsonl produced by a run")
    report_p.add_argument("--out-dir", default=None, help="default: <eventlog dir>/report")
    report_p.add_argument("--no-plots", action="store_true")
    report_p.set_defaults(handler=cmd_report)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--data-dir", default="archipelago-data")
    serve_p.set_defaults(handler=cmd_serve)

    return parser


def _add_shared_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mock-script", help="scripted mock operator file; no network calls occur")
    p.add_argument("--out-dir", default="archipelago-out")
    p.add_argument("--timeout", type=float, default=None, help="evaluator timeout in seconds")


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    seed_program = Path(args.seed_program).read_text(encoding="utf-8")
    problem_spec = Path(args.problem_spec).read_text(encoding="utf-8")

    spec = resolve_evaluator(args.evaluator, config)
    spec.validate()

    operator = _resolve_operator(args, config)

    seed_result = evaluate(seed_program, spec)
    if seed_result.status == STATUS_OK:
        seed_fitness = seed_result.metrics[config.primary_metric]
    else:
        print(
            f"warning: seed program evaluation failed ({seed_result.status}); "
            "starting from the sentinel fitness",
            file=sys.stderr,
        )
        seed_fitness = to_raw(config.sentinel_fitness, config.objective_sense)

    state = new_run(seed_program, config, seed_fitness)
    if seed_result.status == STATUS_OK:
        for island in state.islands:
            island.archive[0].metrics = dict(seed_result.metrics)

    context = {
        "problem_spec": problem_spec,
        "evaluator": args.evaluator,
        "timeout": spec.timeout,
        "mock_script": args.mock_script,
    }
    return _execute(state, operator, spec, Path(args.out_dir), problem_spec, context)


def cmd_resume(args: argparse.Namespace) -> int:
    snapshot = Path(args.checkpoint).read_bytes()
    state = restore(snapshot)
    context = read_context(snapshot)

    if args.iterations is not None:
        if args.iterations < state.iteration:
            raise ConfigError(
                f"budget {args.iterations} is below the checkpoint iteration {state.iteration}"
            )
        state.config.budget = args.iterations

    evaluator_ref = args.evaluator or context.get("evaluator")
    if not evaluator_ref:
        raise ConfigError("checkpoint has no evaluator reference; pass --evaluator")
    if args.timeout is not None:
        state.config.eval_timeout = args.timeout
    elif context.get("timeout"):
        state.config.eval_timeout = float(context["timeout"])
    spec = resolve_evaluator(evaluator_ref, state.config)
    spec.validate()

    if args.problem_spec:
        problem_spec = Path(args.problem_spec).read_text(encoding="utf-8")
    else:
        problem_spec = context.get("problem_spec", "")

    mock_script = args.mock_script or context.get("mock_script")
    if mock_script:
        operator = MockScriptOperator.from_file(mock_script)
    else:
        operator = HttpChatOperator(model=state.config.model_name)

    new_context = dict(
        context,
        evaluator=evaluator_ref,
        timeout=spec.timeout,
        mock_script=mock_script,
        problem_spec=problem_spec,
    )
    return _execute(state, operator, spec, Path(args.out_dir), problem_spec, new_context)


def _execute(state, operator, spec, out_dir: Path, problem_spec: str, context: dict) -> int:
    stop_requested = False

    def _request_stop(signum, frame):
        nonlocal stop_requested
        stop_requested = True

    previous = {}
    for sig in (signal.SIGINT, signal.SIGTERM):
        previous[sig] = signal.signal(sig, _request_stop)
    try:
        engine = Engine(
            state,
            operator,
            spec,
            out_dir=out_dir,
            problem_spec=problem_spec,
            evaluator_source=evaluator_source_text(context.get("evaluator", "")),
            checkpoint_context=context,
            should_stop=lambda: stop_requested,
        )
        final_state, best = engine.run()
    finally:
        for sig, handler in previous.items():
            signal.signal(sig, handler)

    (out_dir / "best_program.txt").write_text(best.source, encoding="utf-8")
    report = emit_report(final_state, engine.events)
    (out_dir / "summary.txt").write_text(report.summary_text, encoding="utf-8")

    if engine.stopped_early:
        print(f"interrupted: checkpointed at iteration {final_state.iteration}")
    print(report.summary_text, end="")
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    log_path = Path(args.eventlog)
    header, rows = load_events(log_path)
    report = emit_report(None, rows, header)

    out_dir = Path(args.out_dir) if args.out_dir else log_path.parent / "report"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.txt").write_text(report.summary_text, encoding="utf-8")
    best_series = [
        {"iteration": i, "best": b} for i, b in zip(report.iterations, report.best_so_far)
    ]
    (out_dir / "best_so_far.json").write_text(json.dumps(best_series), encoding="utf-8")
    if not args.no_plots:
        render_plots(report, out_dir)

    print(report.summary_text, end="")
    print(f"report written to {out_dir}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
    config = RunConfig.from_dict(data)
    config.model_name = args.model
    config.budget = args.iterations
    if args.seed is not None:
        config.seed = args.seed
    if args.timeout is not None:
        config.eval_timeout = args.timeout
    if args.no_local_adaptation:
        config.local_adaptation = False
    if args.no_bandit:
        config.bandit_selection = False
    if args.no_meta:
        config.meta_guidance = False
    if args.no_spawn:
        config.dynamic_spawning = False
    if args.fixed_islands is not None:
        config.fixed_island_count = args.fixed_islands
        config.initial_islands = args.fixed_islands
    config.validate()
    return config


def _resolve_operator(args: argparse.Namespace, config: RunConfig):
    if args.mock_script:
        return MockScriptOperator.from_file(args.mock_script)
    return HttpChatOperator(model=config.model_name)
