"""Run reports: human summary and traces derived from the event log."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig, to_raw
from .state import GlobalState


@dataclass
class RunReport:
    summary_text: str
    best_so_far: list[float] = field(default_factory=list)       # raw objective values
    iterations: list[int] = field(default_factory=list)
    intensity: list[float] = field(default_factory=list)
    signal_traces: dict[int, list[tuple[int, float]]] = field(default_factory=dict)


def load_events(path: str | Path) -> tuple[dict | None, list[dict]]:
    """Read a line-delimited event log; returns (header, iteration rows)."""
    header = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("type") == "header":
            header = record
        elif record.get("type") == "iteration":
            rows.append(record)
    return header, rows


def emit_report(state: GlobalState | None, events: list[dict], header: dict | None = None) -> RunReport:
    """Build a report from in-memory state and/or a loaded event log.

    Either source may be missing: reports over a bare log reconstruct what
    they can, and an empty log yields an empty-but-valid report.
    """
    config = state.config if state is not None else _config_from_header(header)
    sense = config.objective_sense if config is not None else "maximize"

    iterations = [row["iteration"] for row in events]
    # + 0.0 normalizes negative zero for display
    best_so_far = [to_raw(row["global_best"], sense) + 0.0 for row in events]
    intensity = [row["intensity"] for row in events]

    signal_traces: dict[int, list[tuple[int, float]]] = {}
    for row in events:
        for idx, value in enumerate(row.get("signal_per_island", [])):
            signal_traces.setdefault(idx, []).append((row["iteration"], value))

    lines = ["run summary", "==========="]
    if config is not None:
        lines.append(f"model: {config.model_name}")
        lines.append(f"objective: {config.objective_sense}")
        lines.append(f"budget: {config.budget}")
    if events:
        last = events[-1]
        lines.append(f"iterations logged: {len(events)} (last: {last['iteration']})")
        lines.append(f"best objective: {best_so_far[-1]:g}")
        lines.append(f"islands: {last['island_count']}")
        visits = last.get("visits_per_island", [])
        lines.append("visits per island: " + (", ".join(str(v) for v in visits) or "-"))
        improvements = sum(1 for row in events if row["improved"])
        lines.append(f"improvements: {improvements}")
        migrations = sum(len(row.get("migrations", [])) for row in events)
        spawns = sum(1 for row in events if row.get("spawned_island") is not None)
        lines.append(f"migration deliveries: {migrations}; islands spawned: {spawns}")
        lines.append(
            f"model calls: {last['evolution_calls']} evolution + {last['tactic_calls']} tactic"
        )
        tactic_events = [ev for row in events for ev in row.get("tactic_events", [])]
        lines.append(f"tactic events: {len(tactic_events)}")
    else:
        lines.append("iterations logged: 0")
    if state is not None:
        lines.append(f"final global best: {to_raw(state.global_best_fitness, sense) + 0.0:g}")
        lines.append(f"tactics generated: {len(state.tactics)}")

    return RunReport(
        summary_text="\n".join(lines) + "\n",
        best_so_far=best_so_far,
        iterations=iterations,
        intensity=intensity,
        signal_traces=signal_traces,
    )


def render_plots(report: RunReport, out_dir: str | Path) -> list[Path]:
    """Write best-so-far and per-island signal/intensity PNGs; returns the paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    if report.iterations:
        ax.plot(report.iterations, report.best_so_far, drawstyle="steps-post")
    ax.set_xlabel("iteration")
    ax.set_ylabel("best objective so far")
    ax.set_title("best-so-far")
    path = out / "best_so_far.png"
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for idx, trace in sorted(report.signal_traces.items()):
        xs = [p[0] for p in trace]
        ys = [p[1] for p in trace]
        ax1.plot(xs, ys, label=f"island {idx}")
    ax1.set_ylabel("improvement signal")
    if report.signal_traces:
        ax1.legend(fontsize=8)
    if report.iterations:
        ax2.plot(report.iterations, report.intensity)
    ax2.set_ylabel("exploration intensity")
    ax2.set_xlabel("iteration")
    path = out / "islands.png"
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    return written


def _config_from_header(header: dict | None) -> RunConfig | None:
    if header is None or "config" not in header:
        return None
    try:
        return RunConfig.from_dict(header["config"])
    except Exception:
        return None
