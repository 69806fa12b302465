"""FastAPI application exposing the engine over HTTP.

Runs execute in background threads; clients poll status and fetch the event
log, report, and best program. The service executes evaluator scripts and
candidate programs with its own privileges: deploy it only on hosts where
every submitted evaluator is trusted.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query

from ..config import ConfigError, to_raw
from ..evaluation import EvaluatorConfigError
from ..reporting import emit_report, load_events
from ..state import restore
from .jobs import JobError, JobRegistry
from .models import (
    BestProgram,
    EventsPage,
    HealthResponse,
    ReportResponse,
    ResumeRequest,
    RunCreated,
    RunDetail,
    RunSubmission,
    RunSummary,
)

API_VERSION = "0.1.0"


def create_app(data_dir: str = "archipelago-data") -> FastAPI:
    app = FastAPI(title="archipelago", version=API_VERSION)
    registry = JobRegistry(data_dir)
    app.state.registry = registry

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=API_VERSION)

    @app.post("/runs", response_model=RunCreated, status_code=201)
    def submit_run(submission: RunSubmission) -> RunCreated:
        try:
            job = registry.submit(submission.model_dump())
        except (ConfigError, EvaluatorConfigError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return RunCreated(run_id=job.run_id, status=job.status)

    @app.get("/runs", response_model=list[RunSummary])
    def list_runs() -> list[RunSummary]:
        return [_summary(job) for job in registry.list_jobs()]

    @app.get("/runs/{run_id}", response_model=RunDetail)
    def run_detail(run_id: str) -> RunDetail:
        job = _get_job(registry, run_id)
        snap = job.snapshot()
        return RunDetail(
            **_summary(job).model_dump(),
            model=job.submission.get("model"),
            evaluator=job.submission.get("evaluator"),
            improvements=snap.get("improvements", 0),
            tactic_count=snap.get("tactic_calls", 0),
            visits_per_island=snap.get("visits_per_island", []),
        )

    @app.get("/runs/{run_id}/events", response_model=EventsPage)
    def run_events(
        run_id: str,
        offset: int = Query(0, ge=0),
        limit: int = Query(200, ge=1, le=5000),
    ) -> EventsPage:
        job = _get_job(registry, run_id)
        events, total = job.read_events(offset, limit)
        return EventsPage(events=events, next_offset=offset + len(events), total=total)

    @app.get("/runs/{run_id}/report", response_model=ReportResponse)
    def run_report(run_id: str) -> ReportResponse:
        job = _get_job(registry, run_id)
        log = job.out_dir / "run.jsonl"
        if not log.exists():
            return ReportResponse(summary="(no events yet)\n", iterations=[], best_so_far=[])
        header, rows = load_events(log)
        report = emit_report(None, rows, header)
        return ReportResponse(
            summary=report.summary_text,
            iterations=report.iterations,
            best_so_far=report.best_so_far,
        )

    @app.get("/runs/{run_id}/best", response_model=BestProgram)
    def run_best(run_id: str) -> BestProgram:
        job = _get_job(registry, run_id)
        path = job.latest_checkpoint()
        if path is None:
            raise HTTPException(status_code=409, detail="no checkpoint written yet")
        state = restore(path.read_bytes())
        best = state.best_record()
        return BestProgram(
            id=best.id,
            source=best.source,
            fitness=to_raw(best.fitness, state.config.objective_sense),
            metrics=best.metrics,
            iteration_created=best.iteration_created,
            as_of_iteration=state.iteration,
        )

    @app.post("/runs/{run_id}/cancel", response_model=RunSummary)
    def cancel_run(run_id: str) -> RunSummary:
        job = _get_job(registry, run_id)
        job.cancel()
        return _summary(job)

    @app.post("/runs/{run_id}/resume", response_model=RunSummary)
    def resume_run(run_id: str, request: ResumeRequest) -> RunSummary:
        try:
            job = registry.resume(run_id, request.iterations)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        except (JobError, ConfigError, EvaluatorConfigError) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return _summary(job)

    return app


def _get_job(registry: JobRegistry, run_id: str):
    try:
        return registry.get(run_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"unknown run {run_id}")


def _summary(job) -> RunSummary:
    snap = job.snapshot()
    best = snap.get("global_best")
    sense = (job.submission.get("config") or {}).get("objective_sense", "maximize")
    return RunSummary(
        run_id=job.run_id,
        status=snap["status"],
        iteration=snap.get("iteration", 0),
        budget=job.submission.get("iterations", 0),
        best_objective=to_raw(best, sense) if best is not None else None,
        island_count=snap.get("island_count"),
        error=snap.get("error"),
    )
