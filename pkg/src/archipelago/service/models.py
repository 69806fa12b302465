"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RunSubmission(BaseModel):
    seed_program: str
    problem_spec: str = ""
    iterations: int = Field(gt=-1)
    model: str = "mock"
    evaluator: str = Field(description="evaluator script path or builtin:<name>")
    seed: int = 0
    config: dict = Field(default_factory=dict, description="overrides for run-config fields")
    mock_responses: dict[str, str] | None = Field(
        default=None, description="inline mock operator script (tag -> response)"
    )
    mock_default: str | None = None


class RunCreated(BaseModel):
    run_id: str
    status: str


class RunSummary(BaseModel):
    run_id: str
    status: str
    iteration: int
    budget: int
    best_objective: float | None = None
    island_count: int | None = None
    error: str | None = None


class RunDetail(RunSummary):
    model: str | None = None
    evaluator: str | None = None
    improvements: int = 0
    tactic_count: int = 0
    visits_per_island: list[int] = Field(default_factory=list)


class EventsPage(BaseModel):
    events: list[dict]
    next_offset: int
    total: int


class ReportResponse(BaseModel):
    summary: str
    iterations: list[int]
    best_so_far: list[float]


class BestProgram(BaseModel):
    id: str
    source: str
    fitness: float
    metrics: dict[str, float]
    iteration_created: int
    as_of_iteration: int


class ResumeRequest(BaseModel):
    iterations: int = Field(gt=0, description="new total budget")


class HealthResponse(BaseModel):
    status: str
    version: str
