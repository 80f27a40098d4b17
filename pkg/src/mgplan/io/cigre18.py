"""Bundled 18-node residential low-voltage study network.

A single feeder hangs off the point of common coupling (node 1): a nine-node
trunk plus four laterals.  One synchronous unit exists at the PCC; the
candidates are a second synchronous unit and three PV units with different
control modes (virtual-machine, droop, and plain grid-feeding).  The file
ships without representative days; attach clustered profiles before
planning.
"""
from __future__ import annotations

from dataclasses import replace
from importlib import resources

from ..model import (GeneratorAsset, GeneratorKind, GridInterface, LineAsset,
                     LoadSpec, Node, PlanningInstance, RepresentativeDay,
                     SecurityLimits)
from ..scenarios import ProfileSet, cluster_days
from .profiles import synth_profiles
from .schema import parse_instance

_TRUNK_SMAX = 800.0
_LATERAL_SMAX = 420.0

# (from, to, r p.u., x p.u., s_max kVA)
_LINES = (
    (1, 2, 0.010045, 0.005845, _TRUNK_SMAX),
    (2, 3, 0.010045, 0.005845, _TRUNK_SMAX),
    (3, 4, 0.010045, 0.005845, _TRUNK_SMAX),
    (4, 5, 0.010045, 0.005845, _TRUNK_SMAX),
    (5, 6, 0.010045, 0.005845, _TRUNK_SMAX),
    (6, 7, 0.010045, 0.005845, _TRUNK_SMAX),
    (7, 8, 0.010045, 0.005845, _TRUNK_SMAX),
    (8, 9, 0.010045, 0.005845, _TRUNK_SMAX),
    (9, 10, 0.010045, 0.005845, _TRUNK_SMAX),
    (3, 11, 0.03456, 0.01374, _LATERAL_SMAX),
    (4, 12, 0.04032, 0.01603, _LATERAL_SMAX),
    (12, 13, 0.04032, 0.01603, _LATERAL_SMAX),
    (13, 14, 0.04032, 0.01603, _LATERAL_SMAX),
    (14, 15, 0.03456, 0.01374, _LATERAL_SMAX),
    (6, 16, 0.1036, 0.04122, _LATERAL_SMAX),
    (9, 17, 0.03456, 0.01374, _LATERAL_SMAX),
    (10, 18, 0.03456, 0.01374, _LATERAL_SMAX),
)

# (node, kVA, power factor, flexible share, disconnect penalty, critical)
_LOADS = (
    (1, 200.0, 0.95, 0.5, 150.0, False),
    (11, 15.0, 0.95, 0.0, 150.0, False),
    (15, 52.0, 0.95, 0.0, 200.0, True),
    (16, 210.0, 0.85, 0.0, 200.0, True),
    (17, 35.0, 0.95, 0.0, 150.0, False),
    (18, 47.0, 0.95, 0.0, 150.0, False),
)


def build_cigre18() -> PlanningInstance:
    """Construct the study network from its literal parameter tables."""
    nodes = tuple(Node(i, is_pcc=(i == 1)) for i in range(1, 19))
    lines = tuple(LineAsset(a, b, r, x, s) for a, b, r, x, s in _LINES)
    generators = (
        GeneratorAsset(
            "SG1", 1, GeneratorKind.SG, 280.0, 0.060, existing=True,
            ramp_up=140.0, ramp_down=140.0, daily_capacity_factor=0.9,
            inertia=14.0, damping=25.0, gain=1.0, droop=0.03,
            turbine_fraction=0.35, turbine_time=2.0),
        GeneratorAsset(
            "SG2", 15, GeneratorKind.SG, 350.0, 0.060, invest_cost=40000.0,
            ramp_up=175.0, ramp_down=175.0, daily_capacity_factor=0.9,
            inertia=14.0, damping=25.0, gain=1.0, droop=0.03,
            turbine_fraction=0.35, turbine_time=2.0),
        GeneratorAsset(
            "PV1", 17, GeneratorKind.CIG_VSM, 350.0, 0.0,
            invest_cost=70000.0, is_solar=True,
            inertia=14.0, damping=30.0, response_time=0.02),
        GeneratorAsset(
            "PV2", 11, GeneratorKind.CIG_DROOP, 350.0, 0.0,
            invest_cost=65000.0, is_solar=True,
            gain=1.0, droop=0.05, response_time=0.02),
        GeneratorAsset(
            "PV3", 18, GeneratorKind.CIG_GRID_FEEDING, 350.0, 0.0,
            invest_cost=60000.0, is_solar=True),
    )
    loads = tuple(
        LoadSpec(node, pf, nominal_kva=kva, flexible_share=flex,
                 shift_penalty=0.1 if flex > 0 else 0.0,
                 disconnect_penalty=pc, critical=crit)
        for node, kva, pf, flex, pc, crit in _LOADS)
    grid = GridInterface.flat(
        import_price=0.030, export_price=0.015,
        import_limit=2000.0, export_limit=600.0,
        import_limit_q=600.0, export_limit_q=600.0,
        frequency=50.0, s_base=1000.0)
    limits = SecurityLimits(rocof=2.0, nadir=0.8, steady_state=0.2)
    return PlanningInstance(nodes, lines, generators, loads, grid, limits,
                            days=(), name="cigre18")


def cigre18_instance() -> PlanningInstance:
    """Parse the bundled file (no representative days attached)."""
    text = resources.files("mgplan.data").joinpath("cigre18.json").read_text()
    return parse_instance(text)


def attach_profiles(instance: PlanningInstance,
                    days) -> PlanningInstance:
    return replace(instance, days=tuple(days))


def default_days(instance: PlanningInstance, *, seed: int = 2016,
                 n_days: int = 365, k: int = 4) -> list[RepresentativeDay]:
    """Synthesize a year and reduce it to k weighted days."""
    profiles = synth_profiles(instance, seed, n_days)
    return cluster_days(profiles, k, seed)


def cigre18_with_days(*, seed: int = 2016, n_days: int = 365,
                      k: int = 4) -> PlanningInstance:
    instance = cigre18_instance()
    return attach_profiles(instance, default_days(instance, seed=seed,
                                                  n_days=n_days, k=k))
