"""Structural validation of a planning instance.

Violations are collected into a report instead of raised, so callers can
show everything wrong at once.
"""
from __future__ import annotations

import numpy as np

from .types import (HOURS, GeneratorAsset, GeneratorKind, PlanningInstance,
                    ValidationReport)

_KIND_PARAMS = {
    GeneratorKind.SG: ("inertia", "damping", "gain", "droop",
                       "turbine_fraction", "turbine_time"),
    GeneratorKind.CIG_VSM: ("inertia", "damping", "response_time"),
    GeneratorKind.CIG_DROOP: ("gain", "droop", "response_time"),
    GeneratorKind.CIG_GRID_FEEDING: (),
}
_ALL_PARAMS = ("inertia", "damping", "gain", "droop", "turbine_fraction",
               "turbine_time", "response_time")


def _check_generator(gen: GeneratorAsset, node_ids: set[int],
                     report: ValidationReport) -> None:
    tag = f"generator {gen.id}"
    if gen.node not in node_ids:
        report.add(f"{tag}: unknown node {gen.node}")
    if not gen.capacity > 0:
        report.add(f"{tag}: capacity must be positive")
    if not 0 < gen.power_factor <= 1:
        report.add(f"{tag}: power factor outside (0, 1]")
    required = _KIND_PARAMS[gen.kind]
    for name in _ALL_PARAMS:
        value = getattr(gen, name)
        if name in required and value is None:
            report.add(f"{tag}: {gen.kind.value} requires {name}")
        if name not in required and value is not None:
            report.add(f"{tag}: {name} not applicable to {gen.kind.value}")
    if gen.droop is not None and not 0 < gen.droop <= 1:
        report.add(f"{tag}: droop outside (0, 1]")
    if gen.turbine_fraction is not None and not 0 <= gen.turbine_fraction < 1:
        report.add(f"{tag}: turbine fraction outside [0, 1)")
    for name in ("inertia", "damping", "gain", "turbine_time", "response_time"):
        value = getattr(gen, name)
        if value is not None and value < 0:
            report.add(f"{tag}: {name} negative")
    if gen.kind is not GeneratorKind.SG:
        for name in ("ramp_up", "ramp_down", "daily_capacity_factor"):
            if getattr(gen, name) is not None:
                report.add(f"{tag}: {name} only applies to SG units")
    if not gen.existing and gen.invest_cost < 0:
        report.add(f"{tag}: negative investment cost")


def validate_instance(instance: PlanningInstance) -> ValidationReport:
    report = ValidationReport()
    node_ids = [n.id for n in instance.nodes]
    id_set = set(node_ids)
    if len(id_set) != len(node_ids):
        report.add("duplicate node ids")
    pccs = [n.id for n in instance.nodes if n.is_pcc]
    if len(pccs) == 0:
        report.add("no PCC node")
    elif len(pccs) > 1:
        report.add(f"multiple PCC nodes: {pccs}")

    # lines: parameter sanity plus radiality of the built+candidate graph
    parent = {i: i for i in id_set}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    cyclic = False
    for line in instance.lines:
        tag = f"line {line.from_node}-{line.to_node}"
        if line.from_node not in id_set or line.to_node not in id_set:
            report.add(f"{tag}: unknown endpoint")
            continue
        if line.r < 0 or line.x < 0:
            report.add(f"{tag}: negative impedance")
        if not line.s_max > 0:
            report.add(f"{tag}: capacity must be positive")
        if line.candidate and line.built_initially:
            report.add(f"{tag}: candidate line cannot be built initially")
        ra, rb = find(line.from_node), find(line.to_node)
        if ra == rb:
            cyclic = True
        else:
            parent[ra] = rb
    if cyclic:
        report.add("non-radial network: line set contains a cycle")
    roots = {find(i) for i in id_set}
    if len(roots) > 1 and not cyclic:
        report.add(f"network not connected: {len(roots)} components")

    gen_ids = [g.id for g in instance.generators]
    if len(set(gen_ids)) != len(gen_ids):
        report.add("duplicate generator ids")
    for gen in instance.generators:
        _check_generator(gen, id_set, report)

    max_price = float(np.max(instance.grid.import_price, initial=0.0))
    load_nodes = [load.node for load in instance.loads]
    if len(set(load_nodes)) != len(load_nodes):
        report.add("duplicate load nodes")
    for load in instance.loads:
        tag = f"load at node {load.node}"
        if load.node not in id_set:
            report.add(f"{tag}: unknown node")
        if not 0 < load.power_factor <= 1:
            report.add(f"{tag}: power factor outside (0, 1]")
        if load.nominal_kva < 0:
            report.add(f"{tag}: negative nominal rating")
        if not 0 <= load.flexible_share <= 1:
            report.add(f"{tag}: flexible share outside [0, 1]")
        if load.flexible_share > 0 and not load.shift_penalty > max_price:
            report.add(f"{tag}: shift penalty must exceed energy prices")
        if not load.disconnect_penalty > load.shift_penalty:
            report.add(f"{tag}: disconnect penalty must exceed shift penalty")

    grid = instance.grid
    if np.any(grid.import_price < 0) or np.any(grid.export_price < 0):
        report.add("negative energy price")
    if np.any(grid.export_price > grid.import_price):
        report.add("export price above import price invites arbitrage")
    for name in ("import_limit", "export_limit", "import_limit_q",
                 "export_limit_q"):
        if getattr(grid, name) < 0:
            report.add(f"grid {name} negative")
    if not grid.frequency > 0:
        report.add("nominal frequency must be positive")
    if not grid.s_base > 0:
        report.add("system base must be positive")

    for name in ("rocof", "nadir", "steady_state"):
        if not getattr(instance.limits, name) > 0:
            report.add(f"security limit {name} must be positive")
    if not 0 < instance.v_min < instance.v_max:
        report.add("voltage band malformed")

    for idx, day in enumerate(instance.days):
        tag = f"day {idx}"
        if not day.weight > 0:
            report.add(f"{tag}: weight must be positive")
        for node, series in day.load_kw.items():
            if node not in set(load_nodes):
                report.add(f"{tag}: load profile for non-load node {node}")
            if len(series) != HOURS or not np.all(np.isfinite(series)):
                report.add(f"{tag}: bad load series at node {node}")
        for gid, series in day.solar_kw.items():
            if gid not in set(gen_ids):
                report.add(f"{tag}: solar profile for unknown generator {gid}")
            if len(series) != HOURS or not np.all(np.isfinite(series)):
                report.add(f"{tag}: bad solar series for {gid}")
    for load in instance.loads:
        for idx, day in enumerate(instance.days):
            if load.node not in day.load_kw:
                report.add(f"day {idx}: missing load profile for node {load.node}")
    solar_ids = {g.id for g in instance.generators if g.is_solar}
    for idx, day in enumerate(instance.days):
        missing = solar_ids - set(day.solar_kw)
        if missing:
            report.add(f"day {idx}: missing solar profile for {sorted(missing)}")
    return report
