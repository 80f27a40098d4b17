"""Sparse container for linear and mixed-integer linear programs.

Variables are declared with bounds and an optional integrality flag;
constraint rows hold sparse coefficient maps with a sense in {'<=', '=', '>='}.
The objective sense is always minimization (negate coefficients to maximize).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

SENSES = ("<=", "=", ">=")


class ProgramError(ValueError):
    """Malformed program: duplicate names, bad bounds, non-finite data."""


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class SolveOutcome:
    """Result of an LP or MILP solve.

    ``duals`` holds one multiplier per constraint row (LP only), with the
    sign convention d(objective)/d(rhs).  ``gap`` is the relative
    incumbent-vs-bound gap for MILP solves, 0.0 for LPs solved to optimality.
    """

    status: SolveStatus
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    gap: float = 0.0
    iterations: int = 0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL


@dataclass
class _Row:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str


class MixedIntegerProgram:
    """Growable MILP: add variables and rows by name, then freeze to arrays."""

    def __init__(self, name: str = "program"):
        self.name = name
        self.var_names: list[str] = []
        self._var_index: dict[str, int] = {}
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.is_integer: list[bool] = []
        self.obj: dict[int, float] = {}
        self.obj_offset: float = 0.0
        self.rows: list[_Row] = []
        self._row_names: set[str] = set()

    # -- construction ------------------------------------------------------

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                integer: bool = False, obj: float = 0.0) -> int:
        if name in self._var_index:
            raise ProgramError(f"duplicate variable name {name!r}")
        if not (lb <= ub):
            raise ProgramError(f"variable {name!r} has lb {lb} > ub {ub}")
        if math.isnan(lb) or math.isnan(ub) or not math.isfinite(obj):
            raise ProgramError(f"variable {name!r} has non-finite data")
        j = len(self.var_names)
        self.var_names.append(name)
        self._var_index[name] = j
        self.lower.append(float(lb))
        self.upper.append(float(ub))
        self.is_integer.append(bool(integer))
        if obj != 0.0:
            self.obj[j] = self.obj.get(j, 0.0) + obj
        return j

    def add_binary(self, name: str, obj: float = 0.0) -> int:
        return self.add_var(name, 0.0, 1.0, integer=True, obj=obj)

    def var(self, name: str) -> int:
        return self._var_index[name]

    def has_var(self, name: str) -> bool:
        return name in self._var_index

    def set_bounds(self, j: int | str, lb: float, ub: float) -> None:
        if isinstance(j, str):
            j = self._var_index[j]
        if not (lb <= ub):
            raise ProgramError(f"bounds lb {lb} > ub {ub} for column {j}")
        self.lower[j] = float(lb)
        self.upper[j] = float(ub)

    def add_obj_term(self, j: int | str, coeff: float) -> None:
        if isinstance(j, str):
            j = self._var_index[j]
        self.obj[j] = self.obj.get(j, 0.0) + float(coeff)

    def add_row(self, coeffs: dict, sense: str, rhs: float,
                name: str | None = None) -> int:
        if sense not in SENSES:
            raise ProgramError(f"unknown sense {sense!r}")
        if math.isnan(rhs):
            raise ProgramError("NaN rhs")
        resolved: dict[int, float] = {}
        for k, v in coeffs.items():
            j = self._var_index[k] if isinstance(k, str) else k
            if not math.isfinite(v):
                raise ProgramError(f"non-finite coefficient in row {name!r}")
            if v != 0.0:
                resolved[j] = resolved.get(j, 0.0) + float(v)
        if name is None:
            name = f"r{len(self.rows)}"
        if name in self._row_names:
            raise ProgramError(f"duplicate row name {name!r}")
        self._row_names.add(name)
        self.rows.append(_Row(resolved, sense, float(rhs), name))
        return len(self.rows) - 1

    # -- inspection --------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def integer_columns(self) -> list[int]:
        return [j for j, f in enumerate(self.is_integer) if f]

    def to_arrays(self):
        """Freeze to (A csr, senses, rhs, c, lb, ub, int_mask)."""
        n, m = self.num_vars, self.num_rows
        data, ri, ci = [], [], []
        for i, row in enumerate(self.rows):
            for j, v in row.coeffs.items():
                ri.append(i)
                ci.append(j)
                data.append(v)
        A = sp.csr_matrix((data, (ri, ci)), shape=(m, n))
        senses = np.array([row.sense for row in self.rows])
        rhs = np.array([row.rhs for row in self.rows], dtype=float)
        c = np.zeros(n)
        for j, v in self.obj.items():
            c[j] = v
        lb = np.array(self.lower, dtype=float)
        ub = np.array(self.upper, dtype=float)
        int_mask = np.array(self.is_integer, dtype=bool)
        return A, senses, rhs, c, lb, ub, int_mask

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        A, _, _, _, _, _, _ = self.to_arrays()
        return A @ x

    def feasibility_residual(self, x: np.ndarray) -> float:
        """Max violation of rows and bounds at x (0 when feasible)."""
        A, senses, rhs, _, lb, ub, _ = self.to_arrays()
        ax = A @ x
        viol = 0.0
        for i, s in enumerate(senses):
            if s == "<=":
                viol = max(viol, ax[i] - rhs[i])
            elif s == ">=":
                viol = max(viol, rhs[i] - ax[i])
            else:
                viol = max(viol, abs(ax[i] - rhs[i]))
        viol = max(viol, float(np.max(np.maximum(lb - x, 0.0), initial=0.0)))
        viol = max(viol, float(np.max(np.maximum(x - ub, 0.0), initial=0.0)))
        return float(viol)

    def objective_value(self, x: np.ndarray) -> float:
        val = self.obj_offset
        for j, v in self.obj.items():
            val += v * x[j]
        return val
