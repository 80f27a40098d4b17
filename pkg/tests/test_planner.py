"""Master-problem assembly: polygon rows, counts, oracles, invariants."""
import math
from dataclasses import replace

import numpy as np
import pytest

from mgplan.model import (GeneratorAsset, GeneratorKind, GridInterface,
                          LineAsset, LoadSpec, Node, PlanningInstance,
                          RepresentativeDay, SecurityLimits, to_per_unit,
                          validate_instance)
from mgplan.optim import SolveOutcome, SolveStatus, solve_milp
from mgplan.planner import (DegenerateCapacity, ExchangeBounds,
                            InfeasibleBounds, NotOptimal, UnboundedExchange,
                            build_master, extract_solution, polygon_linearize,
                            write_variable_map)
from test_model import tiny_instance


def _member(rows, p, q):
    return all(ap * p + aq * q <= cap + 1e-12 for ap, aq, cap in rows)


def test_polygon_square_edge_offsets():
    rows = polygon_linearize(1.0, 4)
    assert len(rows) == 4
    caps = sorted(cap for _, _, cap in rows)
    assert caps == pytest.approx([math.cos(math.pi / 4)] * 4)
    assert _member(rows, 0.70, 0.0)
    assert not _member(rows, 0.72, 0.0)


def test_polygon_origin_always_inside():
    for sides in (4, 6, 12, 30):
        assert _member(polygon_linearize(2.5, sides), 0.0, 0.0)


def test_polygon_rejects_degenerate_capacity():
    with pytest.raises(DegenerateCapacity):
        polygon_linearize(0.0, 12)
    with pytest.raises(DegenerateCapacity):
        polygon_linearize(-1.0, 12)


def test_polygon_rejects_bad_side_counts():
    with pytest.raises(ValueError):
        polygon_linearize(1.0, 3)
    with pytest.raises(ValueError):
        polygon_linearize(1.0, 7)


def test_polygon_monte_carlo_inner_approximation():
    s_max, sides = 1.0, 12
    rows = polygon_linearize(s_max, sides)
    a = np.array([[ap, aq] for ap, aq, _ in rows])
    caps = np.array([cap for _, _, cap in rows])
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.2 * s_max, 1.2 * s_max, size=(100_000, 2))
    inside = (pts @ a.T <= caps + 1e-12).all(axis=1)
    norms = np.hypot(pts[:, 0], pts[:, 1])
    # polygon membership implies the quadratic limit
    assert np.all(norms[inside] <= s_max + 1e-9)
    # and the inscribed circle of radius s_max cos(pi/m) implies membership
    core = norms <= s_max * math.cos(math.pi / sides) - 1e-9
    assert np.all(inside[core])


def _flat_day(load_kw: float, solar_peak: float, weight: float = 365.0):
    h = np.arange(24)
    return RepresentativeDay(
        weight=weight,
        load_kw={2: np.full(24, load_kw)},
        solar_kw={"PV1": np.clip(solar_peak * np.sin((h - 6) / 12 * np.pi),
                                 0, None)},
    )


def toy_instance(diesel: bool = False) -> PlanningInstance:
    """PCC plus one load node; candidate PV, optionally a candidate diesel."""
    gens = [GeneratorAsset("PV1", 2, GeneratorKind.CIG_GRID_FEEDING, 150.0,
                           0.0, invest_cost=9000.0, is_solar=True)]
    if diesel:
        gens.append(GeneratorAsset(
            "DG1", 2, GeneratorKind.SG, 150.0, 0.10, invest_cost=20000.0,
            inertia=10.0, damping=20.0, gain=1.0, droop=0.05,
            turbine_fraction=0.3, turbine_time=2.0))
    inst = PlanningInstance(
        nodes=(Node(1, is_pcc=True), Node(2)),
        lines=(LineAsset(1, 2, 0.010, 0.006, 500.0),),
        generators=tuple(gens),
        loads=(LoadSpec(2, 0.95, disconnect_penalty=150.0),),
        grid=GridInterface.flat(0.030, 0.015, 600.0, 600.0, 300.0, 300.0),
        limits=SecurityLimits(2.0, 0.8, 0.2),
        days=(_flat_day(120.0, 180.0),),
        name="toy",
    )
    assert validate_instance(inst).ok
    return inst


def _solve(inst, **kwargs):
    n_blocks = 24 // kwargs.get("block_hours", 1)
    bounds = ExchangeBounds.from_instance(inst, n_blocks)
    program, index = build_master(inst, bounds, **kwargs)
    outcome = solve_milp(program)
    return program, index, outcome


def test_toy_counts_one_investment_binary_and_epigraph_rows():
    inst = to_per_unit(toy_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    program, _ = build_master(inst, bounds)
    invest = [n for n in program.var_names if n.startswith(("zg_", "zl_"))]
    assert invest == ["zg_PV1"]
    epigraph = [r for r in program.rows if r.name.startswith("epi_")]
    assert len(epigraph) == 24 * 1


def test_requires_per_unit_instance():
    inst = toy_instance()
    bounds = ExchangeBounds.from_instance(inst, 24)
    with pytest.raises(ValueError, match="per-unit"):
        build_master(inst, bounds)


def test_block_length_must_divide_day():
    inst = to_per_unit(toy_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    with pytest.raises(ValueError, match="divide"):
        build_master(inst, bounds, block_hours=5)


def test_nonfinite_bounds_rejected():
    inst = to_per_unit(toy_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    with pytest.raises(UnboundedExchange):
        build_master(inst, bounds.replace(
            imports=np.full((24, 1), np.inf)))
    with pytest.raises(InfeasibleBounds):
        build_master(inst, bounds.replace(
            exports=np.full((24, 1), -1.0)))


def test_brute_force_investment_oracle():
    inst = to_per_unit(toy_instance(diesel=True))
    bounds = ExchangeBounds.from_instance(inst, 1)
    program, index, outcome = None, None, None
    program, index = build_master(inst, bounds, block_hours=24)
    free = solve_milp(program)
    assert free.is_optimal

    objectives = []
    for z_pv in (0.0, 1.0):
        for z_dg in (0.0, 1.0):
            program.set_bounds("zg_PV1", z_pv, z_pv)
            program.set_bounds("zg_DG1", z_dg, z_dg)
            fixed = solve_milp(program)
            if fixed.is_optimal:
                assert program.feasibility_residual(fixed.x) <= 1e-6
                objectives.append(fixed.objective)
            else:
                objectives.append(math.inf)
    program.set_bounds("zg_PV1", 0.0, 1.0)
    program.set_bounds("zg_DG1", 0.0, 1.0)
    best = min(objectives)
    assert len(set(round(v, 3) for v in objectives)) > 1
    assert free.objective == pytest.approx(best, rel=1e-6)


def test_balance_residual_small_at_optimum():
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    assert outcome.is_optimal
    assert program.feasibility_residual(outcome.x) <= 1e-6


def test_flexible_energy_conserved_exactly():
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    sol = extract_solution(outcome, program, index)
    served = sol.demand[2].sum(axis=0) * index.block_hours
    assert served == pytest.approx(index.energy[2], abs=1e-9)


def test_gamma_zero_when_island_covers_everything():
    # the existing 280 kW unit exceeds the worst combined load
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    sol = extract_solution(outcome, program, index)
    assert sol.gamma <= 1e-9
    assert np.all(sol.island_penalty <= 1e-9)
    for node in (2, 3):
        assert np.all(sol.island_served_const[node] >= 0.5)


def test_gamma_equals_worst_penalty():
    # shrink the unit so the island cannot serve both loads every hour
    inst = tiny_instance()
    gens = (replace(inst.generators[0], capacity=120.0),
            inst.generators[1])
    inst = to_per_unit(replace(inst, generators=gens))
    program, index, outcome = _solve(inst)
    sol = extract_solution(outcome, program, index)
    assert sol.gamma > 1.0
    assert sol.gamma == pytest.approx(sol.island_penalty.max(), abs=1e-6)


def test_objective_monotone_when_bounds_shrink():
    inst = to_per_unit(tiny_instance())
    wide = ExchangeBounds.from_instance(inst, 24)
    program, _ = build_master(inst, wide)
    base = solve_milp(program).objective
    tight = wide.replace(imports=np.full((24, 1), 0.15))
    program, _ = build_master(inst, tight)
    squeezed = solve_milp(program).objective
    assert squeezed >= base - 1e-9 * (1.0 + abs(base))


def test_pcc_voltage_pinned_in_both_modes():
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    for t, o in index.slots():
        assert outcome.x[program.var(f"v_1_{t}_{o}")] == pytest.approx(1.0)
        assert outcome.x[program.var(f"iv_1_{t}_{o}")] == pytest.approx(1.0)


def test_no_islanding_drops_gamma_and_recourse():
    inst = to_per_unit(tiny_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    program, index = build_master(inst, bounds, include_islanding=False)
    assert not program.has_var("gamma")
    assert not any(n.startswith("y_") for n in program.var_names)
    outcome = solve_milp(program)
    sol = extract_solution(outcome, program, index)
    assert sol.gamma == 0.0
    assert sol.plan.generators == ()


def test_extract_rejects_non_optimal_outcome():
    inst = to_per_unit(tiny_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    program, index = build_master(inst, bounds)
    with pytest.raises(NotOptimal):
        extract_solution(SolveOutcome(SolveStatus.INFEASIBLE), program, index)


def test_total_cost_identity_and_objective_match():
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    sol = extract_solution(outcome, program, index)
    assert sol.total_cost == sol.investment_cost + sol.operation_cost \
        + sol.gamma
    assert sol.total_cost == pytest.approx(sol.objective,
                                           rel=1e-6, abs=1e-6)


def test_shift_penalty_prices_deviation_not_served_energy():
    # flat prices, ample import: staying on the preferred profile is free
    inst = to_per_unit(tiny_instance())
    program, index, outcome = _solve(inst)
    sol = extract_solution(outcome, program, index)
    assert sol.shift_cost == pytest.approx(0.0, abs=1e-6)
    nominal = index.flex_nom[2]
    assert np.allclose(sol.flexible[2], nominal, atol=1e-8)

    # a cheap night tariff makes rescheduling pay once the penalty is small
    base = tiny_instance()
    price = np.full(24, 0.200)
    price[:8] = 0.010
    cheap = replace(base, loads=(replace(base.loads[0], shift_penalty=0.001),
                                 base.loads[1]))
    cheap = cheap.with_grid(import_price=price)
    program, index, outcome = _solve(to_per_unit(cheap))
    sol = extract_solution(outcome, program, index)
    assert sol.shift_cost > 0.0
    moved = np.abs(sol.flexible[2] - index.flex_nom[2]).sum() \
        * index.block_hours * 365.0
    assert sol.shift_cost == pytest.approx(
        0.001 * moved * inst.grid.s_base, rel=1e-6)


def test_variable_map_lists_every_column(tmp_path):
    inst = to_per_unit(toy_instance())
    bounds = ExchangeBounds.from_instance(inst, 24)
    program, _ = build_master(inst, bounds)
    path = tmp_path / "varmap.csv"
    write_variable_map(program, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "name,lower,upper,integer,objective"
    assert len(lines) - 1 == program.num_vars
    by_name = {row.split(",")[0]: row.split(",") for row in lines[1:]}
    assert by_name["zg_PV1"][3] == "1"
    assert by_name["gamma"][3] == "0"
