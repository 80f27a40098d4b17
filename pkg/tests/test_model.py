"""Instance validation and per-unit normalization checks."""
import math
from dataclasses import replace

import numpy as np
import pytest

from mgplan.model import (GeneratorAsset, GeneratorKind, GridInterface,
                          LineAsset, LoadSpec, Node, PlanningInstance,
                          RepresentativeDay, SecurityLimits, AlreadyNormalized,
                          from_per_unit, to_per_unit, validate_instance)


def tiny_instance() -> PlanningInstance:
    nodes = (Node(1, is_pcc=True), Node(2), Node(3))
    lines = (LineAsset(1, 2, 0.010, 0.006, 300.0),
             LineAsset(2, 3, 0.035, 0.014, 200.0))
    gens = (
        GeneratorAsset("SG1", 2, GeneratorKind.SG, 280.0, 0.060, existing=True,
                       inertia=14.0, damping=25.0, gain=1.0, droop=0.03,
                       turbine_fraction=0.35, turbine_time=2.0),
        GeneratorAsset("PV1", 3, GeneratorKind.CIG_GRID_FEEDING, 350.0, 0.0,
                       invest_cost=60000.0, is_solar=True),
    )
    loads = (LoadSpec(2, 0.95, flexible_share=0.5, shift_penalty=100.0,
                      disconnect_penalty=150.0),
             LoadSpec(3, 0.85, disconnect_penalty=200.0, critical=True))
    grid = GridInterface.flat(0.030, 0.015, 600.0, 600.0, 300.0, 300.0)
    limits = SecurityLimits(rocof=2.0, nadir=0.8, steady_state=0.2)
    h = np.arange(24)
    day = RepresentativeDay(
        weight=365.0,
        load_kw={2: 120.0 + 30.0 * np.sin(h / 24 * 2 * np.pi),
                 3: np.full(24, 80.0)},
        solar_kw={"PV1": np.clip(300.0 * np.sin((h - 6) / 12 * np.pi), 0, None)},
    )
    return PlanningInstance(nodes, lines, gens, loads, grid, limits, (day,))


def test_tiny_instance_is_valid():
    report = validate_instance(tiny_instance())
    assert report.ok, str(report)


def test_multiple_pcc_nodes_flagged():
    inst = tiny_instance()
    inst = replace(inst, nodes=(Node(1, is_pcc=True), Node(2, is_pcc=True),
                                Node(3)))
    report = validate_instance(inst)
    assert any("multiple PCC" in v for v in report.violations)


def test_missing_pcc_flagged():
    inst = tiny_instance()
    inst = replace(inst, nodes=(Node(1), Node(2), Node(3)))
    report = validate_instance(inst)
    assert any("no PCC" in v for v in report.violations)


def test_cycle_flagged_as_non_radial():
    inst = tiny_instance()
    inst = replace(inst, lines=inst.lines + (LineAsset(3, 1, 0.02, 0.01, 100.0),))
    report = validate_instance(inst)
    assert any("non-radial" in v for v in report.violations)


def test_disconnected_network_flagged():
    inst = tiny_instance()
    inst = replace(inst, lines=(inst.lines[0],))
    report = validate_instance(inst)
    assert any("not connected" in v for v in report.violations)


def test_duplicate_node_ids_flagged():
    inst = tiny_instance()
    inst = replace(inst, nodes=inst.nodes + (Node(3),))
    report = validate_instance(inst)
    assert any("duplicate node ids" in v for v in report.violations)


def test_candidate_line_cannot_be_built():
    inst = tiny_instance()
    bad = LineAsset(1, 3, 0.02, 0.01, 100.0, built_initially=True,
                    candidate=True, invest_cost=1000.0)
    # swap a line out to keep the graph radial; the candidate flag is the point
    inst = replace(inst, lines=(inst.lines[0], bad))
    report = validate_instance(inst)
    assert any("candidate line" in v for v in report.violations)


def test_sg_missing_dynamics_flagged():
    inst = tiny_instance()
    gens = list(inst.generators)
    gens[0] = replace(gens[0], turbine_time=None)
    report = validate_instance(replace(inst, generators=tuple(gens)))
    assert any("requires turbine_time" in v for v in report.violations)


def test_grid_feeding_rejects_dynamics():
    inst = tiny_instance()
    gens = list(inst.generators)
    gens[1] = replace(gens[1], inertia=5.0)
    report = validate_instance(replace(inst, generators=tuple(gens)))
    assert any("not applicable" in v for v in report.violations)


def test_droop_range_enforced():
    inst = tiny_instance()
    gens = list(inst.generators)
    gens[0] = replace(gens[0], droop=1.5)
    report = validate_instance(replace(inst, generators=tuple(gens)))
    assert any("droop outside" in v for v in report.violations)


def test_shift_penalty_must_beat_energy_price():
    inst = tiny_instance()
    loads = list(inst.loads)
    loads[0] = replace(loads[0], shift_penalty=0.001)
    report = validate_instance(replace(inst, loads=tuple(loads)))
    assert any("shift penalty" in v for v in report.violations)


def test_export_price_above_import_flagged():
    inst = tiny_instance().with_grid(export_price=np.full(24, 0.05))
    report = validate_instance(inst)
    assert any("arbitrage" in v for v in report.violations)


def test_missing_load_profile_flagged():
    inst = tiny_instance()
    day = inst.days[0]
    day = replace(day, load_kw={2: day.load_kw[2]})
    report = validate_instance(replace(inst, days=(day,)))
    assert any("missing load profile for node 3" in v for v in report.violations)


def test_solar_profile_for_unknown_generator_flagged():
    inst = tiny_instance()
    day = inst.days[0]
    day = replace(day, solar_kw=dict(day.solar_kw, OTHER=np.zeros(24)))
    report = validate_instance(replace(inst, days=(day,)))
    assert any("unknown generator OTHER" in v for v in report.violations)


def test_wrong_length_series_flagged():
    inst = tiny_instance()
    day = inst.days[0]
    day = replace(day, load_kw={**day.load_kw, 3: np.zeros(23)})
    report = validate_instance(replace(inst, days=(day,)))
    assert any("bad load series" in v for v in report.violations)


def test_reactive_limit_from_power_factor():
    gen = GeneratorAsset("g", 1, GeneratorKind.CIG_GRID_FEEDING, 100.0, 0.0,
                         power_factor=0.8)
    # tan(acos(0.8)) = 0.75 exactly
    assert gen.reactive_limit == pytest.approx(75.0, abs=1e-9)


def test_flexible_split_and_band():
    load = LoadSpec(2, 0.95, flexible_share=0.4, shift_penalty=100.0)
    total = np.full(24, 100.0)
    assert load.constant_active(total) == pytest.approx(np.full(24, 60.0))
    lo, hi = load.flexible_bounds(total)
    assert lo == pytest.approx(np.full(24, 20.0))
    assert hi == pytest.approx(np.full(24, 60.0))
    assert load.daily_flexible_energy(total) == pytest.approx(960.0)


def test_reactive_follows_power_factor():
    load = LoadSpec(2, 0.8)
    q = load.reactive_of(np.array([100.0]))
    assert q[0] == pytest.approx(75.0, abs=1e-9)


def test_per_unit_scales_quantities():
    inst = tiny_instance()
    pu = to_per_unit(inst)
    assert pu.per_unit
    sg = pu.generator("SG1")
    # 280 kW on a 1000 kVA base: share 0.28
    assert sg.capacity == pytest.approx(0.28)
    assert sg.inertia == pytest.approx(14.0 * 0.28)
    assert sg.damping == pytest.approx(25.0 * 0.28)
    assert sg.droop == pytest.approx(0.03 / 0.28)
    # gains, fractions, time constants, prices untouched
    assert sg.gain == 1.0 and sg.turbine_fraction == 0.35
    assert sg.marginal_cost == 0.060
    assert pu.lines[0].s_max == pytest.approx(0.300)
    assert pu.grid.import_limit == pytest.approx(0.600)
    assert pu.days[0].load_kw[3] == pytest.approx(np.full(24, 0.080))


def test_per_unit_round_trip_is_identity():
    inst = tiny_instance()
    back = from_per_unit(to_per_unit(inst))
    for orig, rest in zip(inst.generators, back.generators):
        for name in ("capacity", "inertia", "damping", "droop", "gain"):
            a, b = getattr(orig, name), getattr(rest, name)
            if a is None:
                assert b is None
            else:
                assert b == pytest.approx(a, rel=1e-12)
    for orig, rest in zip(inst.lines, back.lines):
        assert rest.s_max == pytest.approx(orig.s_max, rel=1e-12)
    for node in (2, 3):
        assert back.days[0].load_kw[node] == pytest.approx(
            inst.days[0].load_kw[node], rel=1e-12)
    assert not back.per_unit


def test_double_normalization_rejected():
    pu = to_per_unit(tiny_instance())
    with pytest.raises(AlreadyNormalized):
        to_per_unit(pu)
    with pytest.raises(ValueError):
        from_per_unit(tiny_instance())


def test_normalized_instance_still_validates():
    report = validate_instance(to_per_unit(tiny_instance()))
    # droop rebasing can push droop above 1, which is fine on the system base;
    # everything else must stay clean
    extra = [v for v in report.violations if "droop outside" not in v]
    assert extra == []


def test_instance_lookups():
    inst = tiny_instance()
    assert inst.pcc.id == 1
    assert inst.node_ids() == [1, 2, 3]
    assert inst.generator("PV1").is_solar
    assert inst.load_at(3).critical
    assert inst.load_at(1) is None
    capped = inst.with_grid(import_limit=150.0)
    assert capped.grid.import_limit == 150.0
    assert inst.grid.import_limit == 600.0
