"""Plan files and run reports.

A plan file holds just the build decisions, so a planning run can be
checked or re-simulated later without rerunning the optimization.  A run
report wraps one planning run: the full configuration echo (rerunning
with it reproduces the run bit-exactly), convergence status, the final
plan, and where the emitted CSVs live.
"""
from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone

from ..planner import InvestmentPlan
from .schema import ParseError


def _atomic_text(path, text: str) -> None:
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def plan_to_dict(plan: InvestmentPlan) -> dict:
    return {
        "generators": list(plan.generators),
        "lines": [list(line) for line in plan.lines],
        "investment_cost": plan.investment_cost,
    }


def plan_from_dict(doc: dict) -> InvestmentPlan:
    if not isinstance(doc, dict):
        raise ParseError("plan document must be an object")
    unknown = set(doc) - {"generators", "lines", "investment_cost"}
    if unknown:
        raise ParseError(f"plan: unknown field {sorted(unknown)[0]!r}")
    gens = doc.get("generators", [])
    lines = doc.get("lines", [])
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise ParseError("plan: generators must be a list of ids")
    out_lines = []
    for item in lines:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(v, int) for v in item)):
            raise ParseError("plan: lines must be [from, to] integer pairs")
        out_lines.append((item[0], item[1]))
    cost = doc.get("investment_cost", 0.0)
    if not isinstance(cost, (int, float)) or isinstance(cost, bool):
        raise ParseError("plan: investment_cost must be a number")
    return InvestmentPlan(tuple(gens), tuple(out_lines), float(cost))


def save_plan(plan: InvestmentPlan, path) -> None:
    _atomic_text(path, json.dumps(plan_to_dict(plan), indent=2) + "\n")


def load_plan(path) -> InvestmentPlan:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc
    return plan_from_dict(doc)


def build_report(result, instance_name: str, artifacts: dict) -> dict:
    """Assemble the run report document for one finished planning run."""
    cfg = result.config
    last = result.records[-1]
    return {
        "instance": instance_name,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": {
            "case": cfg.case,
            "alpha": cfg.alpha,
            "epsilon_kw": cfg.epsilon_kw,
            "max_iterations": cfg.max_iterations,
            "gap_tol": cfg.gap_tol,
            "polygon_sides": cfg.polygon_sides,
            "block_hours": cfg.block_hours,
            "seed": cfg.seed,
        },
        "status": result.status,
        "converged": result.converged,
        "iterations": result.iterations,
        "runtime_s": result.runtime_s,
        "plan": plan_to_dict(result.plan),
        "costs": {
            "investment": last.investment_cost,
            "operation": last.operation_cost,
            "shift_penalty": last.shift_cost,
            "disconnection_penalty": last.disconnect_penalty,
            "total": last.total_cost,
        },
        "artifacts": dict(artifacts),
    }


def save_report(report: dict, path) -> None:
    _atomic_text(path, json.dumps(report, indent=2) + "\n")
