"""HTTP face of the planner.

Stateless endpoints answer immediately; planning runs go through a job
table because a real instance takes minutes to solve.  Instances travel
as their native JSON documents and are checked by the same strict parser
the file formats use, so the service cannot drift from the CLI.
"""
from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..dynamics import (NoFrequencyResponse, OverdampedUnsupported,
                        aggregate_params, metrics, simulate_step_response)
from ..io import ParseError, ValidationError, parse_instance
from ..model import to_per_unit, validate_instance
from ..pipeline import (MasterInfeasible, RunConfig, evaluate_plan,
                        run_three_stage)
from ..planner import InvestmentPlan
from ..scenarios import ProfileSet, cluster_days, kmeans
from .jobs import JobStore
from .schemas import (CheckRequest, CheckResponse, ClusterRequest,
                      ClusterResponse, DayModel, HealthResponse,
                      IterationModel, JobCreated, JobStatus, PlanModel,
                      PlanRequest, RunSummary, SimulateRequest,
                      SimulateResponse, SlotModel, ValidateRequest,
                      ValidateResponse)


def _instance_from_doc(doc: dict):
    try:
        return parse_instance(json.dumps(doc))
    except ParseError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _validated_instance(doc: dict):
    instance = _instance_from_doc(doc)
    report = validate_instance(instance)
    if not report.ok:
        raise HTTPException(status_code=422, detail=str(report))
    return instance


def _plan_model(plan: InvestmentPlan) -> PlanModel:
    return PlanModel(generators=list(plan.generators),
                     lines=[tuple(line) for line in plan.lines],
                     investment_cost=plan.investment_cost)


def _slot_models(slots) -> list[SlotModel]:
    return [SlotModel(**vars(slot)) for slot in slots]


def _summary(result) -> RunSummary:
    return RunSummary(
        plan=_plan_model(result.plan),
        converged=result.converged,
        status=result.status,
        iterations=result.iterations,
        runtime_s=result.runtime_s,
        records=[IterationModel(
            psi=rec.psi,
            plan=_plan_model(rec.plan),
            investment_cost=rec.investment_cost,
            operation_cost=rec.operation_cost,
            shift_cost=rec.shift_cost,
            disconnect_penalty=rec.disconnect_penalty,
            total_cost=rec.total_cost,
            import_deviation_kw=rec.import_deviation_kw,
            export_deviation_kw=rec.export_deviation_kw,
            metrics=_slot_models(rec.metrics),
        ) for rec in result.records])


def create_app() -> FastAPI:
    app = FastAPI(title="mgplan", version=__version__)
    jobs = JobStore()

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(body: ValidateRequest) -> ValidateResponse:
        try:
            instance = parse_instance(json.dumps(body.instance))
        except ParseError as exc:
            return ValidateResponse(ok=False, issues=[str(exc)])
        report = validate_instance(instance)
        return ValidateResponse(
            ok=report.ok,
            issues=list(report.violations),
            name=instance.name,
            nodes=len(instance.nodes),
            lines=len(instance.lines),
            generators=len(instance.generators),
            loads=len(instance.loads))

    @app.post("/cluster", response_model=ClusterResponse)
    def cluster(body: ClusterRequest) -> ClusterResponse:
        profiles = ProfileSet(
            loads={node: np.asarray(series, dtype=float)
                   for node, series in body.loads.items()},
            solar={gid: np.asarray(series, dtype=float)
                   for gid, series in body.solar.items()})
        try:
            days = cluster_days(profiles, body.k, body.seed)
            matrix, _ = profiles.to_matrix()
            _, _, residual = kmeans(matrix, body.k, body.seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return ClusterResponse(
            days=[DayModel(
                weight=day.weight,
                load_kw={n: s.tolist() for n, s in day.load_kw.items()},
                solar_kw={g: s.tolist() for g, s in day.solar_kw.items()},
                member_count=day.member_count) for day in days],
            sse=residual)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(body: SimulateRequest) -> SimulateResponse:
        instance = _validated_instance(body.instance)
        instance = to_per_unit(instance)
        try:
            params = aggregate_params(instance.generators,
                                      commitment=body.commit)
            response = simulate_step_response(
                instance.generators, body.commit, body.delta_p,
                horizon=body.horizon_s)
        except NoFrequencyResponse as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        f0 = instance.grid.frequency
        try:
            closed = metrics(params, body.delta_p, f0)
            rocof, nadir, ss_dev = closed.rocof, closed.nadir, closed.ss_dev
        except OverdampedUnsupported:
            dev = response.deviation * f0
            rocof = (f0 * -body.delta_p / params.inertia
                     if params.inertia > 0 else 0.0)
            nadir = float(dev[np.argmax(np.abs(dev))])
            ss_dev = -f0 * body.delta_p / params.stiffness
        return SimulateResponse(
            time_s=response.time.tolist(),
            deviation_hz=(response.deviation * f0).tolist(),
            rocof_hz_per_s=rocof, nadir_hz=nadir, steady_state_hz=ss_dev)

    @app.post("/check", response_model=CheckResponse)
    def check(body: CheckRequest) -> CheckResponse:
        instance = _validated_instance(body.instance)
        plan = InvestmentPlan(tuple(body.plan.generators),
                              tuple(tuple(ln) for ln in body.plan.lines),
                              body.plan.investment_cost)
        try:
            _, slots = evaluate_plan(instance, plan,
                                     block_hours=body.block_hours,
                                     gap_tol=body.gap_tol)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except MasterInfeasible as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return CheckResponse(
            slots=_slot_models(slots),
            import_deviation_kw=sum(s.dp_import_kw for s in slots),
            export_deviation_kw=sum(s.dp_export_kw for s in slots))

    @app.post("/plan", response_model=JobCreated, status_code=202)
    def plan(body: PlanRequest) -> JobCreated:
        instance = _validated_instance(body.instance)
        config = RunConfig(**body.config.model_dump())
        job_id = jobs.submit(lambda: _summary(run_three_stage(instance,
                                                              config)))
        return JobCreated(job_id=job_id)

    @app.get("/jobs/{job_id}", response_model=JobStatus)
    def job_status(job_id: str) -> JobStatus:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        result = job.result if job.state == "done" else None
        return JobStatus(job_id=job.id, state=job.state, error=job.error,
                         result=result)

    app.state.jobs = jobs
    return app


app = create_app()
