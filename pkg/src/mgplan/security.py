"""Transient security of unscheduled islanding, and the bound-tightening rule.

When the microgrid islands, the power it was exchanging at the coupling
point becomes an instant generation/demand step for the committed fleet.
This module computes the largest step the fleet can ride through without
breaking the frequency limits, the corrective reduction of any schedule
that exceeds it, and the tightened exchange bounds fed back to the planner.

All powers here are per-unit on the system base, matching the aggregate
fleet parameters.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import (AggregateFrequencyParams, OverdampedUnsupported,
                       metrics, nadir_from_trajectory, simulate_reduced)
from .model import SecurityLimits
from .optim import MixedIntegerProgram, solve_lp


class BindingLimit(str, Enum):
    ROCOF = "RoCoF"
    NADIR = "Nadir"
    STEADY_STATE = "SS"
    NONE = "None"


class NegativeBoundWarning(UserWarning):
    """Tightening drove an exchange bound below zero; clamped."""


@dataclass(frozen=True)
class SecureEnvelope:
    """Largest riding-through power step and which limit sets it."""
    p_max: float                  # p.u.
    binding: BindingLimit
    rocof_cap: float
    nadir_cap: float
    ss_cap: float


@dataclass(frozen=True)
class CorrectiveDeviation:
    """Schedule reduction needed to make one (hour, day) slot secure.

    At most one of the two sides is nonzero: the reduction applies to
    whichever direction the net exchange flows.
    """
    dp_import: float              # p.u.
    dp_export: float              # p.u.
    binding: BindingLimit

    @property
    def total(self) -> float:
        return self.dp_import + self.dp_export


def _nadir_gain(params: AggregateFrequencyParams) -> float:
    """Peak |frequency deviation| in p.u. frequency per p.u. power step."""
    m, t = params.inertia, params.turbine_time
    stiff = params.stiffness
    if stiff <= 0.0:
        return math.inf  # nothing arrests the drift
    if t <= 0.0 or params.droop_gain <= 0.0 or m <= 0.0:
        return 1.0 / stiff  # first-order response never overshoots
    try:
        result = metrics(params, 1.0, 1.0)
        return abs(result.nadir)
    except OverdampedUnsupported:
        # closed form out of regime: read the peak off the reduced model
        response = simulate_reduced(params, 1.0)
        peak, _ = nadir_from_trajectory(response)
        return abs(peak)


def _cap(limit: float, factor: float) -> float:
    # inf * 0 would be nan; a vacuous limit always means an infinite cap
    return math.inf if math.isinf(limit) else limit * factor


def max_secure_disturbance(params: AggregateFrequencyParams,
                           limits: SecurityLimits,
                           f0: float) -> SecureEnvelope:
    """Tightest of the three power caps implied by the frequency limits."""
    if not f0 > 0:
        raise ValueError("nominal frequency must be positive")
    rocof_cap = _cap(limits.rocof, params.inertia / f0)
    ss_cap = _cap(limits.steady_state, params.stiffness / f0)
    nadir_cap = _cap(limits.nadir, 1.0 / (f0 * _nadir_gain(params)))
    caps = {BindingLimit.ROCOF: rocof_cap,
            BindingLimit.NADIR: nadir_cap,
            BindingLimit.STEADY_STATE: ss_cap}
    binding = min(caps, key=lambda k: caps[k])
    p_max = caps[binding]
    if math.isinf(p_max):
        binding = BindingLimit.NONE
    return SecureEnvelope(p_max, binding, rocof_cap, nadir_cap, ss_cap)


def corrective_deviation(p_import: float, p_export: float,
                         envelope: SecureEnvelope) -> CorrectiveDeviation:
    """Smallest schedule reduction bringing the islanding step inside the
    envelope: max(0, |net exchange| - P_max) on the flowing side."""
    if p_import < 0 or p_export < 0:
        raise ValueError("scheduled exchange must be nonnegative")
    net = p_import - p_export
    excess = max(0.0, abs(net) - envelope.p_max)
    if excess == 0.0:
        return CorrectiveDeviation(0.0, 0.0, BindingLimit.NONE)
    if net > 0:
        return CorrectiveDeviation(excess, 0.0, envelope.binding)
    return CorrectiveDeviation(0.0, excess, envelope.binding)


def feasibility_lp_oracle(p_import: float, p_export: float,
                          params: AggregateFrequencyParams,
                          limits: SecurityLimits,
                          f0: float) -> CorrectiveDeviation:
    """Literal minimum-deviation LP; exists to cross-check the closed form.

    min dp_b + dp_s  subject to the post-correction islanding step staying
    inside each frequency cap, stated as two-sided rows.
    """
    envelope = max_secure_disturbance(params, limits, f0)
    lp = MixedIntegerProgram(name="islanding_feasibility")
    lp.add_var("dp_b", lb=0.0, ub=max(p_import, 0.0), obj=1.0)
    lp.add_var("dp_s", lb=0.0, ub=max(p_export, 0.0), obj=1.0)
    step = {"dp_b": -1.0, "dp_s": 1.0}
    offset = p_import - p_export
    for name, cap in (("rocof", envelope.rocof_cap),
                      ("nadir", envelope.nadir_cap),
                      ("ss", envelope.ss_cap)):
        if math.isinf(cap):
            continue
        lp.add_row(step, "<=", cap - offset, name=f"{name}_hi")
        lp.add_row(step, ">=", -cap - offset, name=f"{name}_lo")
    out = solve_lp(lp)
    if not out.is_optimal:
        raise RuntimeError(f"feasibility LP ended {out.status}")
    dp_b = float(out.x[0])
    dp_s = float(out.x[1])
    binding = envelope.binding if dp_b + dp_s > 1e-12 else BindingLimit.NONE
    return CorrectiveDeviation(dp_b, dp_s, binding)


def tighten_bounds(schedule: np.ndarray, deviations: np.ndarray, alpha: float,
                   bounds: np.ndarray, epsilon: float) -> np.ndarray:
    """Next iteration's exchange bounds.

    Where the deviation exceeds the tolerance, the bound moves to the last
    schedule minus alpha times the deviation; elsewhere it is left alone so
    non-violating slots keep their operational freedom.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    schedule = np.asarray(schedule, dtype=float)
    deviations = np.asarray(deviations, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    if schedule.shape != deviations.shape or schedule.shape != bounds.shape:
        raise ValueError("schedule, deviations, and bounds must align")
    if np.any(deviations < 0):
        raise ValueError("deviations must be nonnegative")
    fire = deviations > epsilon
    tightened = np.where(fire, schedule - alpha * deviations, bounds)
    if np.any(tightened < 0):
        warnings.warn("tightened bound went negative; clamped to zero",
                      NegativeBoundWarning, stacklevel=2)
        tightened = np.maximum(tightened, 0.0)
    return tightened
