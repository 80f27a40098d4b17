"""Request and response bodies for the HTTP service.

The network instance itself travels as its native JSON document and is
checked by the same strict parser the file formats use; these models
cover the envelopes around it.
"""
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class ValidateRequest(BaseModel):
    instance: dict[str, Any]


class Issue(BaseModel):
    message: str


class ValidateResponse(BaseModel):
    ok: bool
    issues: list[str] = Field(default_factory=list)
    name: str | None = None
    nodes: int | None = None
    lines: int | None = None
    generators: int | None = None
    loads: int | None = None


class ClusterRequest(BaseModel):
    loads: dict[int, list[list[float]]]
    solar: dict[str, list[list[float]]] = Field(default_factory=dict)
    k: int = Field(ge=1)
    seed: int = 0


class DayModel(BaseModel):
    weight: float
    load_kw: dict[int, list[float]]
    solar_kw: dict[str, list[float]]
    member_count: int


class ClusterResponse(BaseModel):
    days: list[DayModel]
    sse: float


class SimulateRequest(BaseModel):
    instance: dict[str, Any]
    commit: list[str] | None = None
    delta_p: float
    horizon_s: float | None = Field(default=None, gt=0)


class SimulateResponse(BaseModel):
    time_s: list[float]
    deviation_hz: list[float]
    rocof_hz_per_s: float
    nadir_hz: float
    steady_state_hz: float


class PlanModel(BaseModel):
    generators: list[str]
    lines: list[tuple[int, int]]
    investment_cost: float


class CheckRequest(BaseModel):
    instance: dict[str, Any]
    plan: PlanModel
    block_hours: int = 1
    gap_tol: float = 1e-6


class SlotModel(BaseModel):
    day: int
    block: int
    hour: int
    import_kw: float
    export_kw: float
    secure_limit_kw: float
    rocof: float
    nadir: float
    steady_state: float
    binding: str
    dp_import_kw: float
    dp_export_kw: float


class CheckResponse(BaseModel):
    slots: list[SlotModel]
    import_deviation_kw: float
    export_deviation_kw: float


class RunConfigModel(BaseModel):
    case: Literal[1, 2, 3] = 3
    alpha: float = Field(default=0.6, gt=0, le=1)
    epsilon_kw: float = Field(default=1.0, gt=0)
    max_iterations: int = Field(default=15, ge=1)
    gap_tol: float = Field(default=1e-6, ge=0)
    polygon_sides: int = Field(default=12, ge=3)
    block_hours: int = Field(default=1, ge=1, le=24)
    seed: int = 2016


class PlanRequest(BaseModel):
    instance: dict[str, Any]
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class IterationModel(BaseModel):
    psi: int
    plan: PlanModel
    investment_cost: float
    operation_cost: float
    shift_cost: float
    disconnect_penalty: float
    total_cost: float
    import_deviation_kw: float
    export_deviation_kw: float
    metrics: list[SlotModel]


class RunSummary(BaseModel):
    plan: PlanModel
    converged: bool
    status: str
    iterations: int
    runtime_s: float
    records: list[IterationModel]


class JobCreated(BaseModel):
    job_id: str


class JobStatus(BaseModel):
    job_id: str
    state: Literal["queued", "running", "done", "failed"]
    error: str | None = None
    result: RunSummary | None = None


class HealthResponse(BaseModel):
    status: str
    version: str
