"""Post-islanding frequency response of the committed fleet.

Two views of the same physics live here.  The closed-form path aggregates
synchronous generators, droop converters, and virtual-synchronous-machine
converters into a uniform second-order model and evaluates rate of change
of frequency, nadir, and quasi-steady-state deviation.  The simulation path
integrates the full model (converter filter lags included, no second-order
reduction) with classical fourth-order Runge-Kutta and serves as the
independent oracle for the closed forms.

Sign convention: a positive power step is a net generation deficit, so all
three metrics come out negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import GeneratorAsset, GeneratorKind


class NoFrequencyResponse(ValueError):
    """Committed fleet has neither inertia nor any power-frequency gain."""


class OverdampedUnsupported(ValueError):
    """Damping ratio >= 1: the oscillatory nadir expression does not apply."""


class UnstableModel(RuntimeError):
    """Simulated deviation diverged; fleet parameters are non-physical."""


@dataclass(frozen=True)
class AggregateFrequencyParams:
    """Uniform-model constants on the system base.

    inertia and damping include converter contributions; droop_gain is the
    summed governor stiffness of the synchronous units only, and
    turbine_fraction/turbine_time describe their shared reheat dynamics.
    """
    inertia: float           # M, p.u.*s
    damping: float           # D, p.u.
    droop_gain: float        # R_g, p.u.
    turbine_fraction: float  # F_g, dimensionless
    turbine_time: float      # T, s

    @property
    def stiffness(self) -> float:
        """Total steady-state power per unit of frequency deviation."""
        return self.damping + self.droop_gain

    @property
    def natural_frequency(self) -> float:
        return math.sqrt(self.stiffness / (self.inertia * self.turbine_time))

    @property
    def damping_ratio(self) -> float:
        m, t = self.inertia, self.turbine_time
        return (m + t * (self.damping + self.turbine_fraction)) / (
            2.0 * math.sqrt(m * t * self.stiffness))


@dataclass(frozen=True)
class FrequencyMetrics:
    rocof: float        # Hz/s at t0+
    nadir: float        # Hz, extremum of the deviation
    ss_dev: float       # Hz, settled deviation
    t_nadir: float      # s
    omega_n: float
    zeta: float
    omega_d: float


@dataclass(frozen=True)
class StepResponse:
    time: np.ndarray       # s
    deviation: np.ndarray  # p.u. frequency deviation


def _committed(fleet: Sequence[GeneratorAsset],
               commitment: Iterable[str] | None) -> list[GeneratorAsset]:
    chosen = None if commitment is None else set(commitment)
    out = []
    for gen in fleet:
        if gen.existing or chosen is None or gen.id in chosen:
            out.append(gen)
    return out


def aggregate_params(fleet: Sequence[GeneratorAsset],
                     commitment: Iterable[str] | None = None,
                     extra_damping: float = 0.0
                     ) -> AggregateFrequencyParams:
    """Collapse the committed units into the uniform model constants.

    Dynamic parameters must already be on the system base (normalized
    instance); aggregation is then a plain sum.  Grid-feeding units
    contribute nothing.  `extra_damping` folds a frequency-sensitive load
    constant into D for studies that want it; the default attributes all
    damping to the units themselves.
    """
    if extra_damping < 0:
        raise ValueError("extra damping must be nonnegative")
    inertia = damping = droop_gain = 0.0
    turbine_fraction = 0.0
    turbine_num = turbine_den = 0.0
    for gen in _committed(fleet, commitment):
        if gen.kind is GeneratorKind.SG:
            inertia += gen.inertia
            damping += gen.damping
            stiff = gen.gain / gen.droop
            droop_gain += stiff
            # gain-weighted sum, same scale as droop_gain; this is what makes
            # 1 - 2*zeta*omega_n*T + (omega_n*T)^2 collapse to T*(Rg-Fg)/M
            # exactly, so the closed-form nadir agrees with simulation
            turbine_fraction += gen.turbine_fraction * stiff
            turbine_num += gen.capacity * gen.turbine_time
            turbine_den += gen.capacity
        elif gen.kind is GeneratorKind.CIG_VSM:
            inertia += gen.inertia
            damping += gen.damping
        elif gen.kind is GeneratorKind.CIG_DROOP:
            damping += gen.gain / gen.droop
    if inertia <= 0.0 and damping + droop_gain <= 0.0:
        raise NoFrequencyResponse("no committed unit provides inertia or gain")
    turbine_time = turbine_num / turbine_den if turbine_den > 0 else 0.0
    return AggregateFrequencyParams(inertia, damping + extra_damping,
                                    droop_gain, turbine_fraction, turbine_time)


def metrics(params: AggregateFrequencyParams, delta_p: float,
            f0: float) -> FrequencyMetrics:
    """Closed-form frequency metrics for a step loss of `delta_p` p.u."""
    m = params.inertia
    stiff = params.stiffness
    if stiff <= 0:
        raise NoFrequencyResponse("zero total stiffness")
    rocof = -f0 * delta_p / m if m > 0 else -math.copysign(math.inf, delta_p or 1.0)
    if delta_p == 0.0 and m <= 0:
        rocof = 0.0
    ss_dev = -f0 * delta_p / stiff
    t = params.turbine_time
    rg = params.droop_gain
    if t <= 0.0 or rg <= 0.0 or m <= 0.0:
        # no reheat dynamics: first-order decay, no overshoot
        return FrequencyMetrics(rocof, ss_dev, ss_dev, math.inf, 0.0,
                                math.inf, 0.0)
    if rg <= params.turbine_fraction:
        raise ValueError("aggregate droop gain must exceed turbine fraction")
    omega_n = params.natural_frequency
    zeta = params.damping_ratio
    if zeta >= 1.0:
        raise OverdampedUnsupported(f"damping ratio {zeta:.3f} >= 1")
    omega_d = omega_n * math.sqrt(1.0 - zeta * zeta)
    # atan2 keeps the nadir time positive when zeta*omega_n < 1/T
    t_nadir = math.atan2(omega_d, zeta * omega_n - 1.0 / t) / omega_d
    overshoot = math.sqrt(t * (rg - params.turbine_fraction) / m) * math.exp(
        -zeta * omega_n * t_nadir)
    nadir = ss_dev * (1.0 + overshoot)
    return FrequencyMetrics(rocof, nadir, ss_dev, t_nadir, omega_n, zeta,
                            omega_d)


def _full_model_matrices(fleet: Sequence[GeneratorAsset],
                         commitment: Iterable[str] | None,
                         delta_p: float) -> tuple[np.ndarray, np.ndarray]:
    """State matrix and constant input for the unreduced fleet model.

    State = [frequency deviation, one governor state per SG, one filter
    state per droop converter, one filter state per VSM converter].
    """
    committed = _committed(fleet, commitment)
    sgs = [g for g in committed if g.kind is GeneratorKind.SG]
    droops = [g for g in committed if g.kind is GeneratorKind.CIG_DROOP]
    vsms = [g for g in committed if g.kind is GeneratorKind.CIG_VSM]
    swing_inertia = sum(g.inertia for g in sgs)
    if swing_inertia <= 0.0:
        raise UnstableModel("no synchronous inertia: swing state undefined")
    n = 1 + len(sgs) + len(droops) + len(vsms)
    A = np.zeros((n, n))
    b = np.zeros(n)
    # instantaneous terms seen by the swing equation
    direct = sum(g.damping for g in sgs)
    direct += sum(g.gain * g.turbine_fraction / g.droop for g in sgs)
    for v in vsms:
        if v.response_time > 0:
            direct += v.inertia / v.response_time
        else:
            direct += v.damping  # zero-lag VSM acts as pure damping
    A[0, 0] = -direct / swing_inertia
    b[0] = -delta_p / swing_inertia
    idx = 1
    for g in sgs:
        # governor/turbine washout state
        A[idx, 0] = g.gain * (1.0 - g.turbine_fraction) / (g.droop * g.turbine_time)
        A[idx, idx] = -1.0 / g.turbine_time
        A[0, idx] = -1.0 / swing_inertia
        idx += 1
    for g in droops:
        A[idx, 0] = (g.gain / g.droop) / g.response_time
        A[idx, idx] = -1.0 / g.response_time
        A[0, idx] = -1.0 / swing_inertia
        idx += 1
    for v in vsms:
        if v.response_time > 0:
            A[idx, 0] = (v.damping - v.inertia / v.response_time) / v.response_time
            A[idx, idx] = -1.0 / v.response_time
            A[0, idx] = -1.0 / swing_inertia
        idx += 1
    return A, b


def _rk4_step_map(A: np.ndarray, b: np.ndarray,
                  dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 update collapsed to one affine map.

    For a constant-coefficient system the four stages are affine in the
    state, so x_{k+1} = R x_k + r reproduces the textbook update exactly
    while costing a single matrix-vector product per step.
    """
    eye = np.eye(A.shape[0])
    a2 = A @ A
    a3 = a2 @ A
    r_mat = eye + dt * A + dt ** 2 / 2 * a2 + dt ** 3 / 6 * a3 \
        + dt ** 4 / 24 * (a3 @ A)
    s_mat = dt * eye + dt ** 2 / 2 * A + dt ** 3 / 6 * a2 + dt ** 4 / 24 * a3
    return r_mat, s_mat @ b


def _propagate(r_mat: np.ndarray, r_vec: np.ndarray,
               steps: int) -> np.ndarray:
    """All states of x_{k+1} = R x_k + r from x_0 = 0, as a (steps+1, n)
    array.

    Around the fixed point the recursion is homogeneous, so expanding R in
    its eigenbasis gives every step in one vectorized pass; a near-defective
    eigenbasis falls back to plain iteration.
    """
    n = r_mat.shape[0]
    try:
        x_ss = np.linalg.solve(np.eye(n) - r_mat, r_vec)
        mu, vectors = np.linalg.eig(r_mat)
        coeff = np.linalg.solve(vectors, -x_ss)
        if np.linalg.cond(vectors) < 1e8:
            modes = mu[None, :] ** np.arange(steps + 1)[:, None]
            return np.real(x_ss[None, :] + (modes * coeff[None, :]) @ vectors.T)
    except np.linalg.LinAlgError:
        pass
    states = np.empty((steps + 1, n))
    states[0] = 0.0
    x = np.zeros(n)
    for k in range(steps):
        x = r_mat @ x + r_vec
        states[k + 1] = x
    return states


def _rk4(A: np.ndarray, b: np.ndarray, dt: float, steps: int) -> np.ndarray:
    r_mat, r_vec = _rk4_step_map(A, b, dt)
    x = np.zeros(A.shape[0])
    out = np.empty(steps + 1)
    out[0] = 0.0
    for k in range(steps):
        x = r_mat @ x + r_vec
        f = x[0]
        if abs(f) > 10.0:
            raise UnstableModel(f"deviation {f:.2f} p.u. at t={k * dt:.3f}s")
        out[k + 1] = f
    return out


def _default_horizon(fleet, commitment) -> float:
    try:
        params = aggregate_params(fleet, commitment)
        decay = params.damping_ratio * params.natural_frequency
        if decay > 0 and math.isfinite(decay):
            return max(9.0 / decay, 2.0)
    except (NoFrequencyResponse, ValueError, ZeroDivisionError):
        pass
    return 10.0


def simulate_step_response(fleet: Sequence[GeneratorAsset],
                           commitment: Iterable[str] | None,
                           delta_p: float, dt: float = 1e-3,
                           horizon: float | None = None) -> StepResponse:
    """Integrate the full model for a step loss of `delta_p` p.u."""
    if dt > 1e-3:
        raise ValueError("dt must be at most 1 ms")
    if horizon is None:
        horizon = _default_horizon(fleet, commitment)
    A, b = _full_model_matrices(fleet, commitment, delta_p)
    steps = max(1, int(round(horizon / dt)))
    deviation = _rk4(A, b, dt, steps)
    return StepResponse(np.arange(steps + 1) * dt, deviation)


def simulate_reduced(params: AggregateFrequencyParams, delta_p: float,
                     dt: float = 1e-3, horizon: float | None = None
                     ) -> StepResponse:
    """Integrate the uniform second-order model itself (nadir fallback when
    the closed form is out of its oscillatory regime)."""
    m, t = params.inertia, params.turbine_time
    if m <= 0 or t <= 0:
        raise ValueError("reduced model needs positive inertia and turbine time")
    omega_n = params.natural_frequency
    zeta = params.damping_ratio
    if horizon is None:
        decay = zeta * omega_n
        horizon = max(9.0 / decay, 2.0) if decay > 0 else 10.0
    # second-order section driven by the step, output mixes state and rate
    A = np.array([[0.0, 1.0], [-omega_n ** 2, -2.0 * zeta * omega_n]])
    b = np.array([0.0, -delta_p / (m * t)])
    steps = max(1, int(round(horizon / dt)))
    r_mat, r_vec = _rk4_step_map(A, b, dt)
    states = _propagate(r_mat, r_vec, steps)
    deviation = states @ np.array([1.0, t])
    if np.max(np.abs(deviation)) > 10.0:
        raise UnstableModel("reduced model diverged")
    return StepResponse(np.arange(steps + 1) * dt, deviation)


def nadir_from_trajectory(response: StepResponse) -> tuple[float, float]:
    """Extremum of the deviation and the time it occurs."""
    values = np.asarray(response.deviation)
    if values.size == 0:
        raise ValueError("empty trajectory")
    k = int(np.argmax(np.abs(values)))
    return float(values[k]), float(response.time[k])


def rocof_from_trajectory(response: StepResponse, window: float = 0.01) -> float:
    """Initial slope by finite difference over the first `window` seconds,
    in p.u./s."""
    t = np.asarray(response.time)
    mask = t <= window + 1e-12
    if mask.sum() < 2:
        raise ValueError("trajectory shorter than the slope window")
    k = int(mask.sum()) - 1
    return float((response.deviation[k] - response.deviation[0]) / (t[k] - t[0]))
