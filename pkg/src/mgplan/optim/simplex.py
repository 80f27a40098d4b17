"""Bounded-variable primal simplex with sparse LU basis handling.

Rows are converted to equalities with one slack column each; row senses live
in the slack bounds.  The basis factorization uses SuperLU plus a product-form
eta file between refactorizations.  Phase 1 minimizes the total bound
violation of basic variables with composite costs; the ratio test stops at
the first bound crossing so out-of-bounds basics are walked back into range.
Dantzig pricing with a Bland's-rule fallback after a stall guards against
cycling.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .program import MixedIntegerProgram, SolveOutcome, SolveStatus

FEAS_TOL = 1e-7
DUAL_TOL = 1e-7
PIVOT_TOL = 1e-9
GAP_TOL = 1e-6
REFACTOR_EVERY = 64
STALL_LIMIT = 600

AT_LOWER, AT_UPPER, FREE, BASIC = 0, 1, 2, 3


class NumericalFailure(RuntimeError):
    """Residuals could not be brought below tolerance."""


class _Standardized:
    """Equality-form data shared by all solves of one program."""

    def __init__(self, program: MixedIntegerProgram):
        A, senses, rhs, c, lb, ub, int_mask = program.to_arrays()
        m, n = A.shape
        slack_lb = np.where(senses == "<=", 0.0, np.where(senses == ">=", -np.inf, 0.0))
        slack_ub = np.where(senses == "<=", np.inf, 0.0)
        self.m, self.n = m, n
        self.ncols = n + m
        self.A = sp.hstack([A, sp.eye(m, format="csc")], format="csc")
        self.AT = self.A.T.tocsr()
        self.b = rhs
        self.c = np.concatenate([c, np.zeros(m)])
        self.lb = np.concatenate([lb, slack_lb])
        self.ub = np.concatenate([ub, slack_ub])
        self.int_mask = int_mask
        self.obj_offset = program.obj_offset

    def column(self, j: int) -> np.ndarray:
        out = np.zeros(self.m)
        a, b = self.A.indptr[j], self.A.indptr[j + 1]
        out[self.A.indices[a:b]] = self.A.data[a:b]
        return out


class SimplexSolver:
    """One LP solve on a _Standardized program, optionally warm-started."""

    def __init__(self, std: _Standardized, lb=None, ub=None,
                 maxiter: int = 200000):
        self.std = std
        self.lb = std.lb if lb is None else lb
        self.ub = std.ub if ub is None else ub
        self.maxiter = maxiter
        self.basis = np.arange(std.n, std.n + std.m)
        self.vstat = np.empty(std.ncols, dtype=np.int8)
        self._cold_statuses()
        self.etas: list[tuple[int, np.ndarray]] = []
        self.lu = None
        self.iterations = 0

    # -- state setup -------------------------------------------------------

    def _cold_statuses(self) -> None:
        lb, ub = self.lb, self.ub
        st = np.full(self.std.ncols, AT_LOWER, dtype=np.int8)
        no_lb = ~np.isfinite(lb)
        st[no_lb & np.isfinite(ub)] = AT_UPPER
        st[no_lb & ~np.isfinite(ub)] = FREE
        st[self.basis] = BASIC
        self.vstat = st

    def set_start_basis(self, basis: np.ndarray, vstat: np.ndarray) -> None:
        """Adopt a basis/status pair from a previous solve (warm start)."""
        self.basis = basis.copy()
        st = vstat.copy()
        nb = st != BASIC
        bad_low = nb & (st == AT_LOWER) & ~np.isfinite(self.lb)
        bad_up = nb & (st == AT_UPPER) & ~np.isfinite(self.ub)
        st[bad_low & np.isfinite(self.ub)] = AT_UPPER
        st[bad_low & ~np.isfinite(self.ub)] = FREE
        st[bad_up & np.isfinite(self.lb)] = AT_LOWER
        st[bad_up & ~np.isfinite(self.lb)] = FREE
        st[self.basis] = BASIC
        self.vstat = st

    def _nonbasic_values(self) -> np.ndarray:
        x = np.zeros(self.std.ncols)
        at_l = self.vstat == AT_LOWER
        at_u = self.vstat == AT_UPPER
        x[at_l] = self.lb[at_l]
        x[at_u] = self.ub[at_u]
        return x

    # -- factorization -----------------------------------------------------

    def _refactor(self) -> None:
        self.etas.clear()
        if self.std.m == 0:
            self.lu = None
            self.xB = np.zeros(0)
            return
        B = self.std.A[:, self.basis].tocsc()
        try:
            self.lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:  # singular basis
            raise NumericalFailure(f"singular basis: {exc}") from exc
        x = self._nonbasic_values()
        r = self.std.b - self.std.A @ x
        self.xB = self.lu.solve(r)

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        x = v.copy() if self.lu is None else self.lu.solve(v)
        for r, w in self.etas:
            t = x[r] / w[r]
            if t != 0.0:
                x -= w * t
            x[r] = t
        return x

    def _btran(self, cB: np.ndarray) -> np.ndarray:
        y = cB.copy()
        for r, w in reversed(self.etas):
            t = (y[r] - (w @ y - w[r] * y[r])) / w[r]
            y[r] = t
        return y if self.lu is None else self.lu.solve(y, trans="T")

    # -- main loop ---------------------------------------------------------

    def solve(self) -> SolveOutcome:
        std = self.std
        self._refactor()
        phase = 1
        stall = 0
        bland = False
        best_metric = np.inf
        while self.iterations < self.maxiter:
            self.iterations += 1
            lbB = self.lb[self.basis]
            ubB = self.ub[self.basis]
            below = self.xB < lbB - FEAS_TOL
            above = self.xB > ubB + FEAS_TOL
            infeas = float(np.sum(np.where(below, lbB - self.xB, 0.0))
                           + np.sum(np.where(above, self.xB - ubB, 0.0)))
            if phase == 2 and infeas > FEAS_TOL:
                phase = 1  # numerical drift pushed a basic out of range
                stall, best_metric = 0, np.inf
            if phase == 1 and infeas <= FEAS_TOL:
                phase = 2
                stall, best_metric, bland = 0, np.inf, False
            if phase == 1:
                cB = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                metric = infeas
            else:
                cB = std.c[self.basis]
                metric = float(cB @ self.xB)
            if metric < best_metric - 1e-12:
                best_metric = metric
                stall = 0
            else:
                stall += 1
                if stall > STALL_LIMIT and not bland:
                    bland = True
            y = self._btran(cB)
            d = (std.c if phase == 2 else np.zeros(std.ncols)) - self.std.AT @ y
            j = self._price(d, bland)
            if j < 0:
                if phase == 1:
                    if infeas > FEAS_TOL:
                        return SolveOutcome(SolveStatus.INFEASIBLE,
                                            iterations=self.iterations)
                    phase = 2
                    continue
                return self._finish()
            sigma = 1.0
            if self.vstat[j] == AT_UPPER or (self.vstat[j] == FREE and d[j] > 0):
                sigma = -1.0
            w = self._ftran(std.column(j))
            step = self._ratio_test(j, sigma, w, bland)
            if step is None:
                if phase == 2:
                    return SolveOutcome(SolveStatus.UNBOUNDED,
                                        iterations=self.iterations)
                raise NumericalFailure("phase-1 direction unbounded")
            t, r, flip = step
            self.xB -= (sigma * t) * w
            if flip:
                self.vstat[j] = AT_UPPER if self.vstat[j] == AT_LOWER else AT_LOWER
                continue
            entering_value = self._value_of(j) + sigma * t
            leaving = self.basis[r]
            g = -sigma * w[r]
            if g < 0:  # leaving variable was decreasing
                self.vstat[leaving] = (AT_UPPER if self.xB[r] > self.ub[leaving] - FEAS_TOL
                                       and np.isfinite(self.ub[leaving]) else AT_LOWER)
            else:
                self.vstat[leaving] = (AT_LOWER if self.xB[r] < self.lb[leaving] + FEAS_TOL
                                       and np.isfinite(self.lb[leaving]) else AT_UPPER)
            self.basis[r] = j
            self.vstat[j] = BASIC
            self.xB[r] = entering_value
            self.etas.append((r, w))
            if len(self.etas) >= REFACTOR_EVERY:
                self._refactor()
        return SolveOutcome(SolveStatus.ITERATION_LIMIT, iterations=self.iterations)

    def _value_of(self, j: int) -> float:
        if self.vstat[j] == AT_LOWER:
            return self.lb[j]
        if self.vstat[j] == AT_UPPER:
            return self.ub[j]
        return 0.0

    def _price(self, d: np.ndarray, bland: bool) -> int:
        st = self.vstat
        elig = ((st == AT_LOWER) & (d < -DUAL_TOL)
                | (st == AT_UPPER) & (d > DUAL_TOL)
                | (st == FREE) & (np.abs(d) > DUAL_TOL))
        idx = np.flatnonzero(elig)
        if idx.size == 0:
            return -1
        if bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def _ratio_test(self, j, sigma, w, bland):
        """First bound crossing along the direction; returns (t, row, flip)."""
        m = self.std.m
        g = -sigma * w  # rate of change of each basic variable
        lbB = self.lb[self.basis]
        ubB = self.ub[self.basis]
        xB = self.xB
        above = xB > ubB + FEAS_TOL
        below = xB < lbB - FEAS_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.full(m, np.inf)
            dec = g < -PIVOT_TOL
            inc = g > PIVOT_TOL
            # decreasing: above ub stops at ub, in range at lb, below lb free fall
            tgt = np.where(above, ubB, np.where(below, -np.inf, lbB))
            r_dec = (xB - tgt) / -g
            ratios[dec] = np.where(np.isfinite(tgt[dec]), r_dec[dec], np.inf)
            # increasing: below lb stops at lb, in range at ub, above ub free rise
            tgt = np.where(below, lbB, np.where(above, np.inf, ubB))
            r_inc = (tgt - xB) / g
            ratios[inc] = np.where(np.isfinite(tgt[inc]), r_inc[inc], np.inf)
        ratios = np.maximum(ratios, 0.0)
        t_block = float(np.min(ratios)) if m else np.inf
        span = self.ub[j] - self.lb[j]
        t_self = span if np.isfinite(span) else np.inf
        if t_self <= t_block:
            if not np.isfinite(t_self):
                return None
            return t_self, -1, True
        if not np.isfinite(t_block):
            return None
        cand = np.flatnonzero(ratios <= t_block + 1e-12)
        if bland:
            r = int(cand[np.argmin(self.basis[cand])])
        else:
            r = int(cand[np.argmax(np.abs(w[cand]))])
        return float(ratios[r]), r, False

    # -- wrap-up -----------------------------------------------------------

    def _finish(self) -> SolveOutcome:
        std = self.std
        self._refactor()  # fresh factorization for clean residuals
        x = self._nonbasic_values()
        x[self.basis] = self.xB
        resid = float(np.max(np.abs(std.A @ x - std.b), initial=0.0))
        bound_viol = float(max(np.max(np.maximum(self.lb - x, 0.0), initial=0.0),
                               np.max(np.maximum(x - self.ub, 0.0), initial=0.0)))
        y = self._btran(std.c[self.basis])
        d = std.c - std.AT @ y
        obj = float(std.c @ x) + std.obj_offset
        nb = self.vstat != BASIC
        xN = np.where(np.isfinite(x), x, 0.0)
        dual_obj = float(std.b @ y) + float(d[nb] @ xN[nb]) + std.obj_offset
        gap = abs(obj - dual_obj)
        if resid > FEAS_TOL or bound_viol > FEAS_TOL:
            raise NumericalFailure(
                f"primal residual {max(resid, bound_viol):.3e} above tolerance")
        if gap > GAP_TOL * (1.0 + abs(obj)):
            raise NumericalFailure(f"duality gap {gap:.3e} above tolerance")
        return SolveOutcome(
            SolveStatus.OPTIMAL,
            objective=obj,
            x=x[:std.n].copy(),
            duals=y.copy(),
            reduced_costs=d[:std.n].copy(),
            iterations=self.iterations,
        )


def solve_lp(program: MixedIntegerProgram, maxiter: int = 200000) -> SolveOutcome:
    """Solve the LP relaxation (integrality ignored) to optimality."""
    std = _Standardized(program)
    return SimplexSolver(std, maxiter=maxiter).solve()
