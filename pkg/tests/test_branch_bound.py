"""Branch-and-bound checks against brute-force enumeration and scipy."""
import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from mgplan.optim import (MixedIntegerProgram, NodeLimitNoIncumbent,
                          SolveStatus, solve_lp, solve_milp)


def test_two_binary_packing():
    # max 3a+2b subject to a+b <= 1 in binaries, stated as min of the negative
    p = MixedIntegerProgram()
    p.add_binary("a", obj=-3.0)
    p.add_binary("b", obj=-2.0)
    p.add_row({"a": 1.0, "b": 1.0}, "<=", 1.0)
    out = solve_milp(p)
    assert out.status == SolveStatus.OPTIMAL
    assert out.objective == pytest.approx(-3.0, abs=1e-9)
    assert out.x[0] == pytest.approx(1.0, abs=1e-6)
    assert out.x[1] == pytest.approx(0.0, abs=1e-6)


def test_integral_relaxation_short_circuits():
    # LP optimum lands on integers, so the tree is a single node
    p = MixedIntegerProgram()
    p.add_binary("z", obj=1.0)
    p.add_var("x", lb=0.0, ub=4.0, obj=1.0)
    p.add_row({"z": 1.0, "x": 1.0}, ">=", 3.0)
    relax = solve_lp(p)
    out = solve_milp(p)
    assert out.status == SolveStatus.OPTIMAL
    assert out.objective == pytest.approx(relax.objective, abs=1e-9)
    assert out.nodes == 1


def test_knapsack_10_items_vs_enumeration():
    rng = np.random.default_rng(42)
    values = rng.uniform(1, 10, 10)
    weights = rng.uniform(1, 6, 10)
    cap = 0.45 * weights.sum()
    p = MixedIntegerProgram()
    for j in range(10):
        p.add_binary(f"z{j}", obj=-float(values[j]))
    p.add_row({j: float(weights[j]) for j in range(10)}, "<=", float(cap))
    out = solve_milp(p)
    best = 0.0
    for bits in itertools.product([0, 1], repeat=10):
        sel = np.array(bits)
        if weights @ sel <= cap + 1e-12:
            best = max(best, float(values @ sel))
    assert out.status == SolveStatus.OPTIMAL
    assert -out.objective == pytest.approx(best, abs=1e-8)


def test_integer_infeasible_but_lp_feasible():
    p = MixedIntegerProgram()
    p.add_binary("z1")
    p.add_binary("z2")
    p.add_row({"z1": 2.0, "z2": 2.0}, "=", 1.0)
    assert solve_milp(p).status == SolveStatus.INFEASIBLE


def test_node_limit_without_incumbent_raises():
    p = MixedIntegerProgram()
    for j in range(6):
        p.add_binary(f"z{j}")
    p.add_row({j: 1.0 for j in range(6)}, "=", 2.5)  # no integral point
    with pytest.raises(NodeLimitNoIncumbent):
        solve_milp(p, node_limit=1)


def test_incumbent_sequence_monotone():
    rng = np.random.default_rng(3)
    seen = []
    p = MixedIntegerProgram()
    values = rng.uniform(1, 8, 12)
    weights = rng.uniform(1, 5, 12)
    for j in range(12):
        p.add_binary(f"z{j}", obj=-float(values[j]))
    p.add_row({j: float(weights[j]) for j in range(12)}, "<=",
              float(0.4 * weights.sum()))
    out = solve_milp(p, on_incumbent=lambda obj, nodes: seen.append(obj))
    assert out.status == SolveStatus.OPTIMAL
    assert len(seen) >= 1
    assert all(b < a for a, b in zip(seen, seen[1:]))
    assert seen[-1] == pytest.approx(out.objective, abs=1e-12)


def test_reported_gap_within_tolerance():
    rng = np.random.default_rng(9)
    p = MixedIntegerProgram()
    for j in range(8):
        p.add_binary(f"z{j}", obj=float(rng.uniform(-5, -1)))
    p.add_row({j: float(rng.uniform(1, 3)) for j in range(8)}, "<=", 6.0)
    out = solve_milp(p, gap_tol=1e-6)
    assert out.status == SolveStatus.OPTIMAL
    assert out.gap <= 1e-6


def _brute_force(nb, nc, A, b, senses, cb, cc):
    best = np.inf
    for bits in itertools.product([0, 1], repeat=nb):
        fixed = np.array(bits, dtype=float)
        if nc:
            Au, bu = [], []
            for i in range(len(b)):
                row = A[i, nb:]
                rhs = b[i] - A[i, :nb] @ fixed
                if senses[i] == "<=":
                    Au.append(row); bu.append(rhs)
                else:
                    Au.append(-row); bu.append(-rhs)
            r = linprog(cc, A_ub=Au, b_ub=bu, bounds=[(0, 2)] * nc,
                        method="highs")
            if r.status == 0:
                best = min(best, float(cb @ fixed + r.fun))
        else:
            act = A[:, :nb] @ fixed
            ok = all((act[i] <= b[i] + 1e-9) if senses[i] == "<="
                     else (act[i] >= b[i] - 1e-9) for i in range(len(b)))
            if ok:
                best = min(best, float(cb @ fixed))
    return best


def test_random_mips_vs_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(40):
        nb = int(rng.integers(2, 9))
        nc = int(rng.integers(0, 4))
        m = int(rng.integers(1, 8))
        p = MixedIntegerProgram()
        cb = rng.uniform(-3, 3, nb)
        cc = rng.uniform(-2, 2, nc)
        for j in range(nb):
            p.add_binary(f"z{j}", obj=float(cb[j]))
        for j in range(nc):
            p.add_var(f"u{j}", lb=0.0, ub=2.0, obj=float(cc[j]))
        A = np.where(rng.random((m, nb + nc)) < 0.5,
                     rng.uniform(-2, 3, (m, nb + nc)), 0.0)
        b = rng.uniform(0.5, 4, m)
        senses = rng.choice(["<=", ">="], m, p=[0.8, 0.2])
        for i in range(m):
            coeffs = {j: float(A[i, j]) for j in range(nb + nc) if A[i, j] != 0.0}
            p.add_row(coeffs, str(senses[i]), float(b[i]))
        out = solve_milp(p)
        best = _brute_force(nb, nc, A, b, senses, cb, cc)
        if best == np.inf:
            assert out.status == SolveStatus.INFEASIBLE
        else:
            assert out.status == SolveStatus.OPTIMAL
            assert out.objective == pytest.approx(best, abs=1e-6, rel=1e-6)
