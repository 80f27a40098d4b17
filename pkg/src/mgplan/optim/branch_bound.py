"""Best-first branch and bound over LP relaxations.

Nodes carry their own variable bounds plus the parent's final basis so each
child LP warm-starts from one dual pivot away.  Branching picks the most
fractional integer column, lowest index on ties.  Until a first incumbent
exists the search dives depth-first along the rounding direction; afterwards
it is pure best-first on the relaxation bound.
"""
from __future__ import annotations

import heapq
import itertools

import numpy as np

from .program import MixedIntegerProgram, SolveOutcome, SolveStatus
from .simplex import NumericalFailure, SimplexSolver, _Standardized

INT_TOL = 1e-6


class NodeLimitNoIncumbent(RuntimeError):
    """Node budget exhausted before any integral solution was found."""


class _Node:
    __slots__ = ("bound", "seq", "lb", "ub", "basis", "vstat", "depth")

    def __init__(self, bound, seq, lb, ub, basis, vstat, depth):
        self.bound = bound
        self.seq = seq
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.vstat = vstat
        self.depth = depth

    def __lt__(self, other):
        return (self.bound, self.seq) < (other.bound, other.seq)


def _solve_node(std, node, maxiter):
    solver = SimplexSolver(std, lb=node.lb, ub=node.ub, maxiter=maxiter)
    if node.basis is not None:
        solver.set_start_basis(node.basis, node.vstat)
    try:
        out = solver.solve()
    except NumericalFailure:
        if node.basis is None:
            raise
        solver = SimplexSolver(std, lb=node.lb, ub=node.ub, maxiter=maxiter)
        out = solver.solve()
    return out, solver


def _fractional(x, int_cols):
    """(max distance to nearest integer, argmax column) over integer columns."""
    vals = x[int_cols]
    frac = np.abs(vals - np.round(vals))
    j = int(np.argmax(frac))
    return float(frac[j]), int(int_cols[j])


def solve_milp(program: MixedIntegerProgram, gap_tol: float = 1e-6,
               node_limit: int = 100000, lp_maxiter: int = 200000,
               on_incumbent=None) -> SolveOutcome:
    """Minimize the program honoring integrality on flagged columns.

    on_incumbent, when given, is called with (objective, node_count) every
    time a strictly better integral solution replaces the incumbent.
    """
    std = _Standardized(program)
    int_cols = np.flatnonzero(std.int_mask)
    if int_cols.size == 0:
        out = SimplexSolver(std, maxiter=lp_maxiter).solve()
        out.nodes = 1
        return out

    root = _Node(-np.inf, 0, std.lb.copy(), std.ub.copy(), None, None, 0)
    seq = itertools.count(1)
    heap: list[_Node] = []
    dive: list[_Node] = []
    incumbent_x = None
    incumbent_obj = np.inf
    nodes = 0
    total_iters = 0
    pruned_bound = None
    current: _Node | None = root

    def rel_gap(bound):
        if incumbent_x is None:
            return np.inf
        return max(0.0, (incumbent_obj - bound) / (1e-9 + abs(incumbent_obj)))

    while True:
        if current is None:
            if incumbent_x is None and dive:
                current = dive.pop()
            elif heap:
                current = heapq.heappop(heap)
                if rel_gap(current.bound) <= gap_tol:
                    pruned_bound = current.bound
                    heap.clear()
                    dive.clear()
                    current = None
                    break
            elif dive:
                current = dive.pop()
            else:
                break
        if nodes >= node_limit:
            break
        nodes += 1
        out, solver = _solve_node(std, current, lp_maxiter)
        total_iters += out.iterations
        if out.status == SolveStatus.UNBOUNDED and nodes == 1:
            out.nodes = nodes
            return out
        if out.status != SolveStatus.OPTIMAL:
            if out.status == SolveStatus.ITERATION_LIMIT and nodes == 1:
                out.nodes = nodes
                return out
            current = None  # infeasible or stalled subproblem: prune
            continue
        if incumbent_x is not None and rel_gap(out.objective) <= gap_tol:
            current = None
            continue
        frac, bcol = _fractional(out.x, int_cols)
        if frac <= INT_TOL:
            if out.objective < incumbent_obj:
                incumbent_obj = out.objective
                incumbent_x = out.x.copy()
                if on_incumbent is not None:
                    on_incumbent(incumbent_obj, nodes)
            current = None
            continue
        basis = solver.basis.copy()
        vstat = solver.vstat.copy()
        xval = out.x[bcol]
        down = _Node(out.objective, next(seq), current.lb.copy(),
                     current.ub.copy(), basis, vstat, current.depth + 1)
        down.ub[bcol] = np.floor(xval)
        up = _Node(out.objective, next(seq), current.lb, current.ub,
                   basis, vstat, current.depth + 1)
        up.lb = current.lb.copy()
        up.lb[bcol] = np.ceil(xval)
        current = None
        children = []
        for child in (down, up):
            if child.lb[bcol] > child.ub[bcol] + 1e-12:
                continue
            children.append(child)
        if incumbent_x is None and children:
            # dive toward the rounding direction first
            prefer = up if (xval - np.floor(xval)) >= 0.5 else down
            if prefer in children:
                children.remove(prefer)
                dive.append(prefer)
        for child in children:
            heapq.heappush(heap, child)

    if incumbent_x is None:
        if nodes >= node_limit:
            raise NodeLimitNoIncumbent(
                f"no integral solution within {node_limit} nodes")
        return SolveOutcome(SolveStatus.INFEASIBLE, nodes=nodes,
                            iterations=total_iters)
    open_bounds = [n.bound for n in heap] + [n.bound for n in dive]
    if current is not None:
        open_bounds.append(current.bound)
    if pruned_bound is not None:
        open_bounds.append(pruned_bound)
    best_bound = min(open_bounds) if open_bounds else incumbent_obj
    gap = rel_gap(best_bound)
    status = SolveStatus.OPTIMAL if gap <= gap_tol else SolveStatus.ITERATION_LIMIT
    return SolveOutcome(status, objective=incumbent_obj, x=incumbent_x,
                        gap=gap, nodes=nodes, iterations=total_iters)
