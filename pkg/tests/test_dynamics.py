"""Frequency-response checks: closed forms against full-model simulation."""
import math

import numpy as np
import pytest

from mgplan.dynamics import (AggregateFrequencyParams, NoFrequencyResponse,
                             OverdampedUnsupported, UnstableModel,
                             aggregate_params, metrics, nadir_from_trajectory,
                             rocof_from_trajectory, simulate_reduced,
                             simulate_step_response)
from mgplan.model import GeneratorAsset, GeneratorKind

F0 = 50.0


def sg(id="SG", M=14.0, D=25.0, K=1.0, R=0.03, F=0.35, T=2.0, existing=True):
    return GeneratorAsset(id=id, node=1, kind=GeneratorKind.SG, capacity=1.0,
                          marginal_cost=0.06, existing=existing, inertia=M,
                          damping=D, gain=K, droop=R, turbine_fraction=F,
                          turbine_time=T)


def droop_cig(id="DR", K=1.0, R=0.2, Td=0.02, existing=True):
    return GeneratorAsset(id=id, node=2, kind=GeneratorKind.CIG_DROOP,
                          capacity=1.0, marginal_cost=0.0, existing=existing,
                          gain=K, droop=R, response_time=Td)


def vsm_cig(id="VS", M=4.9, D=10.5, Tv=0.02, existing=True):
    return GeneratorAsset(id=id, node=3, kind=GeneratorKind.CIG_VSM,
                          capacity=1.0, marginal_cost=0.0, existing=existing,
                          inertia=M, damping=D, response_time=Tv)


def grid_feeding(id="GF", existing=True):
    return GeneratorAsset(id=id, node=4, kind=GeneratorKind.CIG_GRID_FEEDING,
                          capacity=1.0, marginal_cost=0.0, existing=existing)


def test_aggregation_hand_values():
    p = aggregate_params([sg()])
    assert p.inertia == 14.0
    assert p.damping == 25.0
    assert p.droop_gain == pytest.approx(1.0 / 0.03)
    assert p.turbine_fraction == pytest.approx(0.35 / 0.03)
    assert p.turbine_time == 2.0
    assert p.stiffness == pytest.approx(25.0 + 1.0 / 0.03)
    # (M + T(D+Fg)) / (2 sqrt(M T (D+Rg)))
    assert p.damping_ratio == pytest.approx(1.0804697894834425, rel=1e-12)


def test_aggregation_mixes_converter_kinds():
    p = aggregate_params([sg(F=0.05), droop_cig(), vsm_cig()])
    assert p.inertia == pytest.approx(14.0 + 4.9)
    assert p.damping == pytest.approx(25.0 + 1.0 / 0.2 + 10.5)
    assert p.droop_gain == pytest.approx(1.0 / 0.03)
    assert p.turbine_fraction == pytest.approx(0.05 / 0.03)


def test_grid_feeding_contributes_nothing():
    with_gf = aggregate_params([sg(), grid_feeding()])
    without = aggregate_params([sg()])
    assert with_gf == without
    with pytest.raises(NoFrequencyResponse):
        aggregate_params([grid_feeding()])


def test_commitment_filters_candidates():
    committed = sg()
    candidate = droop_cig(id="NEW", existing=False)
    both = aggregate_params([committed, candidate], commitment={"NEW"})
    only = aggregate_params([committed, candidate], commitment=set())
    assert both.damping == pytest.approx(25.0 + 5.0)
    assert only.damping == 25.0


def test_rocof_and_steady_state_hand_values():
    m = metrics(aggregate_params([sg(F=0.05)]), 0.5, F0)
    # -f0 dP / M and -f0 dP / (D + Rg)
    assert m.rocof == pytest.approx(-50.0 * 0.5 / 14.0, rel=1e-12)
    assert m.ss_dev == pytest.approx(-50.0 * 0.5 / (25.0 + 1.0 / 0.03), rel=1e-12)


def test_overdamped_fleet_rejected_by_closed_form():
    p = aggregate_params([sg()])  # F = 0.35 pushes zeta to 1.08
    assert p.damping_ratio > 1.0
    with pytest.raises(OverdampedUnsupported):
        metrics(p, 0.5, F0)


def test_reduced_simulation_matches_full_model_when_exact():
    # one SG and no converter lags: the reduced model IS the full model
    fleet = [sg()]
    p = aggregate_params(fleet)
    reduced = simulate_reduced(p, 0.5, dt=1e-3)
    full = simulate_step_response(fleet, None, 0.5, dt=1e-3,
                                  horizon=reduced.time[-1])
    n_red, t_red = nadir_from_trajectory(reduced)
    n_full, t_full = nadir_from_trajectory(full)
    assert n_red == pytest.approx(n_full, rel=1e-6)
    assert t_red == pytest.approx(t_full, abs=2e-3)
    assert n_full * F0 == pytest.approx(-0.571776, abs=1e-4)
    assert t_full == pytest.approx(1.065, abs=2e-3)


def test_closed_form_nadir_matches_simulation():
    fleet = [sg(F=0.05)]
    m = metrics(aggregate_params(fleet), 0.5, F0)
    assert m.zeta == pytest.approx(0.83303396, abs=1e-6)
    assert m.nadir == pytest.approx(-0.68227957, abs=1e-6)
    assert m.t_nadir == pytest.approx(1.063681, abs=1e-5)
    sim = simulate_step_response(fleet, None, 0.5, dt=1e-3)
    nadir, t_nadir = nadir_from_trajectory(sim)
    assert m.nadir == pytest.approx(nadir * F0, rel=1e-4)
    assert m.t_nadir == pytest.approx(t_nadir, abs=2e-3)
    assert m.ss_dev == pytest.approx(sim.deviation[-1] * F0, rel=1e-3)


def test_initial_slope_matches_rocof():
    fleet = [sg(F=0.05)]
    m = metrics(aggregate_params(fleet), 0.5, F0)
    sim = simulate_step_response(fleet, None, 0.5, dt=1e-3)
    slope = rocof_from_trajectory(sim, window=0.01) * F0
    assert slope == pytest.approx(m.rocof, rel=0.02)


def test_converter_lag_error_stays_small():
    # 20 ms filter lags are inside the closed form's validity region
    fleet = [sg(F=0.05), droop_cig()]
    m = metrics(aggregate_params(fleet), 0.5, F0)
    sim = simulate_step_response(fleet, None, 0.5, dt=1e-3)
    nadir, _ = nadir_from_trajectory(sim)
    assert m.nadir == pytest.approx(nadir * F0, rel=5e-3)
    assert m.ss_dev == pytest.approx(sim.deviation[-1] * F0, rel=1e-3)


def test_vsm_nadir_and_steady_state():
    fleet = [sg(F=0.05), vsm_cig()]
    m = metrics(aggregate_params(fleet), 0.5, F0)
    sim = simulate_step_response(fleet, None, 0.5, dt=1e-3)
    nadir, _ = nadir_from_trajectory(sim)
    assert m.nadir == pytest.approx(nadir * F0, rel=5e-3)
    assert m.ss_dev == pytest.approx(sim.deviation[-1] * F0, rel=1e-3)


def test_metrics_scale_linearly_with_step():
    p = aggregate_params([sg(F=0.05)])
    small = metrics(p, 0.1, F0)
    large = metrics(p, 0.5, F0)
    assert large.nadir / small.nadir == pytest.approx(5.0, rel=1e-14)
    assert large.rocof / small.rocof == pytest.approx(5.0, rel=1e-14)
    assert large.ss_dev / small.ss_dev == pytest.approx(5.0, rel=1e-14)
    assert large.t_nadir == small.t_nadir


def test_power_surplus_flips_sign():
    p = aggregate_params([sg(F=0.05)])
    m = metrics(p, -0.5, F0)
    assert m.rocof > 0 and m.nadir > 0 and m.ss_dev > 0


def test_zero_step_is_quiet():
    m = metrics(aggregate_params([sg(F=0.05)]), 0.0, F0)
    assert m.rocof == 0.0 and m.nadir == 0.0 and m.ss_dev == 0.0
    sim = simulate_step_response([sg()], None, 0.0, dt=1e-3, horizon=2.0)
    assert np.all(sim.deviation == 0.0)


def test_more_inertia_softens_rocof():
    lighter = metrics(aggregate_params([sg(F=0.05)]), 0.5, F0)
    heavier = metrics(aggregate_params([sg(F=0.05, M=28.0)]), 0.5, F0)
    assert abs(heavier.rocof) < abs(lighter.rocof)
    assert heavier.ss_dev == lighter.ss_dev


def test_droop_only_fleet_is_first_order():
    m = metrics(aggregate_params([droop_cig(R=0.05)]), 0.5, F0)
    assert m.nadir == m.ss_dev == pytest.approx(-50.0 * 0.5 / 20.0)
    assert math.isinf(m.t_nadir)
    assert m.rocof == -math.inf


def test_full_model_needs_synchronous_inertia():
    with pytest.raises(UnstableModel):
        simulate_step_response([droop_cig()], None, 0.5, dt=1e-3, horizon=1.0)


def test_nonsense_aggregate_rejected():
    bad = AggregateFrequencyParams(inertia=14.0, damping=25.0, droop_gain=10.0,
                                   turbine_fraction=12.0, turbine_time=2.0)
    with pytest.raises(ValueError):
        metrics(bad, 0.5, F0)


def test_coarse_time_step_rejected():
    with pytest.raises(ValueError):
        simulate_step_response([sg()], None, 0.5, dt=0.01)


def test_trajectory_helpers():
    resp = simulate_step_response([sg()], None, 0.5, dt=1e-3, horizon=3.0)
    nadir, t_nadir = nadir_from_trajectory(resp)
    assert nadir < 0 and 0.0 < t_nadir <= 3.0
    with pytest.raises(ValueError):
        rocof_from_trajectory(resp, window=1e-9)
