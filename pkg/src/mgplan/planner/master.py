"""Assembly of the investment master problem and solution extraction.

One program holds three layers: investment binaries, a grid-connected
operating schedule per (block, day), and an islanded operating schedule per
(block, day) describing the hour right after an unscheduled disconnection.
A single epigraph variable bounds the worst islanding penalty across all
slots, so the objective trades investment and normal operation against the
most expensive island the plan leaves possible.

Powers are per-unit on the system base; every cost coefficient carries the
base and the block length, so the objective is plain currency.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..model import (HOURS, GeneratorAsset, GeneratorKind, LineAsset,
                     LoadSpec, PlanningInstance)
from ..optim import MixedIntegerProgram, SolveOutcome
from .bounds import ExchangeBounds
from .polygon import DEFAULT_SIDES, polygon_linearize


class NotOptimal(RuntimeError):
    """extract_solution called on a non-optimal outcome."""


@dataclass(frozen=True)
class InvestmentPlan:
    """Build decisions and their exact annualized cost."""
    generators: tuple[str, ...]
    lines: tuple[tuple[int, int], ...]
    investment_cost: float


@dataclass
class MasterSolution:
    """Optimal plan and schedules in planning terms.

    ``operation_cost`` carries every recurring term: exchange, generation,
    and the shift penalty; ``shift_cost`` repeats the penalty alone for
    reporting.  ``total_cost`` therefore reproduces the solver objective.
    """
    plan: InvestmentPlan
    imports: np.ndarray               # (n_blocks, n_days), p.u.
    exports: np.ndarray
    generation: dict[str, np.ndarray]
    demand: dict[int, np.ndarray]     # served active demand per load node
    flexible: dict[int, np.ndarray]   # flexible part of the demand
    island_penalty: np.ndarray        # (n_blocks, n_days), currency
    island_served_const: dict[int, np.ndarray]  # y values, 1 = served
    island_unserved_flex: dict[int, np.ndarray]  # p.u.
    gamma: float                      # currency
    investment_cost: float
    operation_cost: float
    shift_cost: float
    objective: float

    @property
    def total_cost(self) -> float:
        return self.investment_cost + self.operation_cost + self.gamma


@dataclass
class _Tree:
    parent_line: dict[int, LineAsset]      # child node -> line above it
    orientation: dict[tuple[int, int], tuple[int, int]]  # key -> (parent, child)
    order: list[LineAsset]


@dataclass
class MasterIndex:
    """Joins program variable names back to the planning instance.

    Block-averaged demand and availability live here so solution extraction
    can recompute every cost term without touching the program again.
    """
    instance: PlanningInstance
    block_hours: int
    n_blocks: int
    n_days: int
    include_islanding: bool
    polygon_sides: int
    weights: np.ndarray
    import_price: np.ndarray          # (n_blocks,)
    export_price: np.ndarray
    const_p: dict[int, np.ndarray]    # (n_blocks, n_days) per load node
    const_q: dict[int, np.ndarray]
    flex_lo: dict[int, np.ndarray]
    flex_hi: dict[int, np.ndarray]
    flex_nom: dict[int, np.ndarray]   # preferred flexible profile
    energy: dict[int, np.ndarray]     # (n_days,) daily active energy, p.u. h
    p_bar: dict[str, np.ndarray]      # (n_blocks, n_days) per generator
    tree: _Tree = field(repr=False, default=None)

    @property
    def dollars_per_block(self) -> float:
        """Converts p.u. block power to energy in the instance's currency
        scale: S_base kW times block length in hours."""
        return self.instance.grid.s_base * self.block_hours

    def slots(self):
        for o in range(self.n_days):
            for t in range(self.n_blocks):
                yield t, o


def _block_average(hourly: np.ndarray, n_blocks: int) -> np.ndarray:
    return np.asarray(hourly, dtype=float).reshape(n_blocks, -1).mean(axis=1)


def _build_tree(instance: PlanningInstance) -> _Tree:
    adjacency: dict[int, list[LineAsset]] = {n.id: [] for n in instance.nodes}
    for line in instance.lines:
        adjacency[line.from_node].append(line)
        adjacency[line.to_node].append(line)
    root = instance.pcc.id
    parent_line: dict[int, LineAsset] = {}
    orientation: dict[tuple[int, int], tuple[int, int]] = {}
    order: list[LineAsset] = []
    seen = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for line in adjacency[node]:
            other = line.to_node if line.from_node == node else line.from_node
            if other in seen:
                continue
            seen.add(other)
            parent_line[other] = line
            orientation[line.key] = (node, other)
            order.append(line)
            frontier.append(other)
    return _Tree(parent_line, orientation, order)


def _line_name(line: LineAsset) -> str:
    return f"{line.from_node}_{line.to_node}"


class _Assembler:
    """Holds the shared naming scheme and the per-mode block builders."""

    def __init__(self, program: MixedIntegerProgram, index: MasterIndex,
                 bounds: ExchangeBounds):
        self.p = program
        self.ix = index
        self.bounds = bounds
        self.inst = index.instance
        self.tree = index.tree
        self.by_node_gens: dict[int, list[GeneratorAsset]] = {}
        for gen in self.inst.generators:
            self.by_node_gens.setdefault(gen.node, []).append(gen)
        self.loads: dict[int, LoadSpec] = {l.node: l for l in self.inst.loads}

    # ---- investment ----
    def add_investment(self) -> None:
        for gen in self.inst.generators:
            if not gen.existing:
                self.p.add_binary(f"zg_{gen.id}", obj=gen.invest_cost)
        for line in self.inst.lines:
            if line.candidate:
                self.p.add_binary(f"zl_{_line_name(line)}",
                                  obj=line.invest_cost)

    def _line_switch(self, line: LineAsset) -> str | None:
        return f"zl_{_line_name(line)}" if line.candidate else None

    def _gen_switch(self, gen: GeneratorAsset) -> str | None:
        return None if gen.existing else f"zg_{gen.id}"

    # ---- shared network pieces ----
    def add_network(self, pre: str, t: int, o: int) -> None:
        """Flows, voltages, thermal polygons, and voltage-drop rows."""
        ix = self.ix
        for line in self.inst.lines:
            ln = _line_name(line)
            cap = line.s_max
            self.p.add_var(f"{pre}fp_{ln}_{t}_{o}", lb=-cap, ub=cap)
            self.p.add_var(f"{pre}fq_{ln}_{t}_{o}", lb=-cap, ub=cap)
        for node in self.inst.nodes:
            if node.is_pcc:
                self.p.add_var(f"{pre}v_{node.id}_{t}_{o}", lb=1.0, ub=1.0)
            else:
                self.p.add_var(f"{pre}v_{node.id}_{t}_{o}",
                               lb=self.inst.v_min, ub=self.inst.v_max)
        for line in self.inst.lines:
            ln = _line_name(line)
            fp, fq = f"{pre}fp_{ln}_{t}_{o}", f"{pre}fq_{ln}_{t}_{o}"
            switch = self._line_switch(line)
            for j, (ap, aq, cap) in enumerate(
                    polygon_linearize(line.s_max, ix.polygon_sides)):
                coeffs = {fp: ap, fq: aq}
                rhs = cap * (1.0 if line.built_initially else 0.0)
                if switch is not None:
                    coeffs[switch] = -cap
                self.p.add_row(coeffs, "<=", rhs,
                               name=f"{pre}poly_{ln}_{j}_{t}_{o}")
            parent, child = self.tree.orientation[line.key]
            vp, vc = f"{pre}v_{parent}_{t}_{o}", f"{pre}v_{child}_{t}_{o}"
            drop = {vp: 1.0, vc: -1.0, fp: -line.r, fq: -line.x}
            if switch is None:
                self.p.add_row(drop, "=", 0.0, name=f"{pre}vd_{ln}_{t}_{o}")
            else:
                # relaxed when the candidate is not built
                big = (self.inst.v_max - self.inst.v_min
                       + (line.r + line.x) * line.s_max)
                hi = dict(drop)
                hi[switch] = big
                self.p.add_row(hi, "<=", big, name=f"{pre}vdh_{ln}_{t}_{o}")
                lo = dict(drop)
                lo[switch] = -big
                self.p.add_row(lo, ">=", -big, name=f"{pre}vdl_{ln}_{t}_{o}")

    def _flow_terms(self, pre: str, node: int, t: int, o: int,
                    kind: str) -> dict[str, float]:
        """Inflow-minus-outflow coefficients for one node's balance row."""
        coeffs: dict[str, float] = {}
        line = self.tree.parent_line.get(node)
        if line is not None:
            coeffs[f"{pre}{kind}_{_line_name(line)}_{t}_{o}"] = 1.0
        for other in self.inst.lines:
            parent, _child = self.tree.orientation[other.key]
            if parent == node:
                coeffs[f"{pre}{kind}_{_line_name(other)}_{t}_{o}"] = -1.0
        return coeffs

    def add_generators(self, pre: str, t: int, o: int) -> None:
        for gen in self.inst.generators:
            p_bar = float(self.ix.p_bar[gen.id][t, o])
            q_bar = p_bar * np.tan(np.arccos(gen.power_factor))
            pg = f"{pre}pg_{gen.id}_{t}_{o}"
            qg = f"{pre}qg_{gen.id}_{t}_{o}"
            switch = self._gen_switch(gen)
            if switch is None:
                self.p.add_var(pg, lb=0.0, ub=p_bar)
                self.p.add_var(qg, lb=-q_bar, ub=q_bar)
            else:
                self.p.add_var(pg, lb=0.0, ub=max(p_bar, 0.0))
                self.p.add_var(qg, lb=-q_bar, ub=q_bar)
                self.p.add_row({pg: 1.0, switch: -p_bar}, "<=", 0.0,
                               name=f"{pre}cap_{gen.id}_{t}_{o}")
                if q_bar > 0.0:
                    self.p.add_row({qg: 1.0, switch: -q_bar}, "<=", 0.0,
                                   name=f"{pre}capqh_{gen.id}_{t}_{o}")
                    self.p.add_row({qg: 1.0, switch: q_bar}, ">=", 0.0,
                                   name=f"{pre}capql_{gen.id}_{t}_{o}")

    # ---- grid-connected block ----
    def add_grid_block(self, t: int, o: int) -> None:
        ix = self.ix
        grid = self.inst.grid
        money = ix.weights[o] * ix.dollars_per_block
        self.p.add_var(f"pb_{t}_{o}", lb=0.0,
                       ub=float(self.bounds.imports[t, o]),
                       obj=money * float(ix.import_price[t]))
        self.p.add_var(f"ps_{t}_{o}", lb=0.0,
                       ub=float(self.bounds.exports[t, o]),
                       obj=-money * float(ix.export_price[t]))
        self.p.add_var(f"qb_{t}_{o}", lb=0.0, ub=grid.import_limit_q)
        self.p.add_var(f"qs_{t}_{o}", lb=0.0, ub=grid.export_limit_q)
        self.add_network("", t, o)
        self.add_generators("", t, o)
        for gen in self.inst.generators:
            self.p.add_obj_term(f"pg_{gen.id}_{t}_{o}",
                                money * gen.marginal_cost)
        for node, load in self.loads.items():
            lo = float(ix.flex_lo[node][t, o])
            hi = float(ix.flex_hi[node][t, o])
            cp = float(ix.const_p[node][t, o])
            cq = float(ix.const_q[node][t, o])
            tan_phi = np.tan(np.arccos(load.power_factor))
            self.p.add_var(f"dpf_{node}_{t}_{o}", lb=lo, ub=hi)
            self.p.add_var(f"dqf_{node}_{t}_{o}", lb=lo * tan_phi,
                           ub=hi * tan_phi)
            if load.flexible_share > 0.0:
                # shifting away from the preferred profile is what costs
                self.p.add_var(f"shp_{node}_{t}_{o}", lb=0.0,
                               obj=money * load.shift_penalty)
                self.p.add_var(f"shm_{node}_{t}_{o}", lb=0.0,
                               obj=money * load.shift_penalty)
                self.p.add_row({f"dpf_{node}_{t}_{o}": 1.0,
                                f"shp_{node}_{t}_{o}": -1.0,
                                f"shm_{node}_{t}_{o}": 1.0}, "=",
                               float(ix.flex_nom[node][t, o]),
                               name=f"shift_{node}_{t}_{o}")
            self.p.add_var(f"dp_{node}_{t}_{o}", lb=0.0)
            self.p.add_var(f"dq_{node}_{t}_{o}", lb=-math.inf)
            self.p.add_row({f"dp_{node}_{t}_{o}": 1.0,
                            f"dpf_{node}_{t}_{o}": -1.0}, "=", cp,
                           name=f"dpdef_{node}_{t}_{o}")
            self.p.add_row({f"dq_{node}_{t}_{o}": 1.0,
                            f"dqf_{node}_{t}_{o}": -1.0}, "=", cq,
                           name=f"dqdef_{node}_{t}_{o}")
        for node in self.inst.nodes:
            active = self._flow_terms("", node.id, t, o, "fp")
            reactive = self._flow_terms("", node.id, t, o, "fq")
            if node.is_pcc:
                active[f"pb_{t}_{o}"] = 1.0
                active[f"ps_{t}_{o}"] = -1.0
                reactive[f"qb_{t}_{o}"] = 1.0
                reactive[f"qs_{t}_{o}"] = -1.0
            for gen in self.by_node_gens.get(node.id, ()):
                active[f"pg_{gen.id}_{t}_{o}"] = 1.0
                reactive[f"qg_{gen.id}_{t}_{o}"] = 1.0
            if node.id in self.loads:
                active[f"dp_{node.id}_{t}_{o}"] = -1.0
                reactive[f"dq_{node.id}_{t}_{o}"] = -1.0
            self.p.add_row(active, "=", 0.0, name=f"balp_{node.id}_{t}_{o}")
            self.p.add_row(reactive, "=", 0.0, name=f"balq_{node.id}_{t}_{o}")

    def add_grid_couplings(self) -> None:
        """Rows spanning blocks: ramps, capacity factors, flexible energy."""
        ix = self.ix
        dt = float(ix.block_hours)
        for o in range(ix.n_days):
            for node, load in self.loads.items():
                if load.flexible_share <= 0.0:
                    continue
                coeffs = {f"dp_{node}_{t}_{o}": dt for t in range(ix.n_blocks)}
                self.p.add_row(coeffs, "=", float(ix.energy[node][o]),
                               name=f"energy_{node}_{o}")
            for gen in self.inst.generators:
                if gen.kind is not GeneratorKind.SG:
                    continue
                if gen.ramp_up is not None:
                    for t in range(1, ix.n_blocks):
                        step = {f"pg_{gen.id}_{t}_{o}": 1.0,
                                f"pg_{gen.id}_{t - 1}_{o}": -1.0}
                        self.p.add_row(step, "<=", gen.ramp_up * dt,
                                       name=f"rampu_{gen.id}_{t}_{o}")
                        self.p.add_row(step, ">=", -gen.ramp_down * dt,
                                       name=f"rampd_{gen.id}_{t}_{o}")
                if gen.daily_capacity_factor is not None:
                    coeffs = {f"pg_{gen.id}_{t}_{o}": dt
                              for t in range(ix.n_blocks)}
                    cap = gen.daily_capacity_factor * gen.capacity * HOURS
                    self.p.add_row(coeffs, "<=", cap, name=f"cf_{gen.id}_{o}")

    # ---- islanded block ----
    def add_island_block(self, t: int, o: int) -> None:
        ix = self.ix
        dt = float(ix.block_hours)
        self.add_network("i", t, o)
        self.add_generators("i", t, o)
        money = ix.dollars_per_block
        penalty_rhs = 0.0
        epigraph = {"gamma": 1.0}
        for node, load in self.loads.items():
            cp = float(ix.const_p[node][t, o])
            lo = float(ix.flex_lo[node][t, o])
            hi = float(ix.flex_hi[node][t, o])
            tan_phi = np.tan(np.arccos(load.power_factor))
            if cp > 1e-12:
                self.p.add_binary(f"y_{node}_{t}_{o}")
                epigraph[f"y_{node}_{t}_{o}"] = load.disconnect_penalty \
                    * cp * money
                penalty_rhs += load.disconnect_penalty * cp * money
            has_flex = hi > 0.0
            if has_flex:
                self.p.add_var(f"idpf_{node}_{t}_{o}", lb=lo, ub=hi)
                self.p.add_var(f"idqf_{node}_{t}_{o}", lb=lo * tan_phi,
                               ub=hi * tan_phi)
                self.p.add_var(f"devp_{node}_{t}_{o}", lb=0.0)
                self.p.add_var(f"devm_{node}_{t}_{o}", lb=0.0)
                self.p.add_var(f"devq_{node}_{t}_{o}", lb=-math.inf)
                self.p.add_row({f"idpf_{node}_{t}_{o}": 1.0,
                                f"dpf_{node}_{t}_{o}": -1.0,
                                f"devp_{node}_{t}_{o}": -1.0,
                                f"devm_{node}_{t}_{o}": 1.0}, "=", 0.0,
                               name=f"idev_{node}_{t}_{o}")
                self.p.add_row({f"idqf_{node}_{t}_{o}": 1.0,
                                f"dqf_{node}_{t}_{o}": -1.0,
                                f"devq_{node}_{t}_{o}": -1.0}, "=", 0.0,
                               name=f"idevq_{node}_{t}_{o}")
                epigraph[f"devm_{node}_{t}_{o}"] = \
                    -load.disconnect_penalty * money
            # served island energy cannot exceed what the day still owes
            history = {f"dp_{node}_{tp}_{o}": dt for tp in range(t)}
            if cp > 1e-12:
                history[f"y_{node}_{t}_{o}"] = cp * dt
            if has_flex:
                history[f"idpf_{node}_{t}_{o}"] = dt
            if history:
                self.p.add_row(history, "<=", float(ix.energy[node][o]),
                               name=f"ihist_{node}_{t}_{o}")
        for gen in self.inst.generators:
            if gen.kind is not GeneratorKind.SG:
                continue
            if gen.ramp_up is not None:
                step = {f"ipg_{gen.id}_{t}_{o}": 1.0,
                        f"pg_{gen.id}_{t}_{o}": -1.0}
                self.p.add_row(step, "<=", gen.ramp_up * dt,
                               name=f"irampu_{gen.id}_{t}_{o}")
                self.p.add_row(step, ">=", -gen.ramp_down * dt,
                               name=f"irampd_{gen.id}_{t}_{o}")
            if gen.daily_capacity_factor is not None:
                coeffs = {f"ipg_{gen.id}_{t}_{o}": dt}
                for tp in range(t):
                    coeffs[f"pg_{gen.id}_{tp}_{o}"] = dt
                cap = gen.daily_capacity_factor * gen.capacity * HOURS
                self.p.add_row(coeffs, "<=", cap, name=f"icf_{gen.id}_{t}_{o}")
        for node in self.inst.nodes:
            active = self._flow_terms("i", node.id, t, o, "fp")
            reactive = self._flow_terms("i", node.id, t, o, "fq")
            for gen in self.by_node_gens.get(node.id, ()):
                active[f"ipg_{gen.id}_{t}_{o}"] = 1.0
                reactive[f"iqg_{gen.id}_{t}_{o}"] = 1.0
            rhs_p = rhs_q = 0.0
            if node.id in self.loads:
                cp = float(ix.const_p[node.id][t, o])
                cq = float(ix.const_q[node.id][t, o])
                hi = float(ix.flex_hi[node.id][t, o])
                if cp > 1e-12:
                    active[f"y_{node.id}_{t}_{o}"] = -cp
                    reactive[f"y_{node.id}_{t}_{o}"] = -cq
                if hi > 0.0:
                    active[f"idpf_{node.id}_{t}_{o}"] = -1.0
                    reactive[f"idqf_{node.id}_{t}_{o}"] = -1.0
            self.p.add_row(active, "=", rhs_p, name=f"ibalp_{node.id}_{t}_{o}")
            self.p.add_row(reactive, "=", rhs_q,
                           name=f"ibalq_{node.id}_{t}_{o}")
        self.p.add_row(epigraph, ">=", penalty_rhs, name=f"epi_{t}_{o}")


def build_master(instance: PlanningInstance, bounds: ExchangeBounds, *,
                 include_islanding: bool = True,
                 polygon_sides: int = DEFAULT_SIDES,
                 block_hours: int = 1
                 ) -> tuple[MixedIntegerProgram, MasterIndex]:
    """Assemble the master MILP for one outer iteration.

    `bounds` carries the current exchange ceilings; islanding blocks and the
    epigraph can be switched off for grid-only studies.
    """
    if not instance.per_unit:
        raise ValueError("build_master needs a per-unit instance")
    if HOURS % block_hours != 0:
        raise ValueError("block length must divide 24")
    bounds.check()
    n_blocks = HOURS // block_hours
    n_days = len(instance.days)
    if bounds.imports.shape != (n_blocks, n_days):
        raise ValueError("exchange bounds shaped for a different calendar")

    const_p, const_q, flex_lo, flex_hi = {}, {}, {}, {}
    flex_nom, energy = {}, {}
    for load in instance.loads:
        cp = np.empty((n_blocks, n_days))
        lo = np.empty((n_blocks, n_days))
        hi = np.empty((n_blocks, n_days))
        nom = np.empty((n_blocks, n_days))
        e = np.empty(n_days)
        for o, day in enumerate(instance.days):
            hourly = day.load_kw[load.node]
            cp[:, o] = _block_average(load.constant_active(hourly), n_blocks)
            b_lo, b_hi = load.flexible_bounds(hourly)
            lo[:, o] = _block_average(b_lo, n_blocks)
            hi[:, o] = _block_average(b_hi, n_blocks)
            nom[:, o] = _block_average(load.flexible_nominal(hourly), n_blocks)
            e[o] = float(np.sum(hourly))
        tan_phi = float(np.tan(np.arccos(load.power_factor)))
        const_p[load.node] = cp
        const_q[load.node] = cp * tan_phi
        flex_lo[load.node] = lo
        flex_hi[load.node] = hi
        flex_nom[load.node] = nom
        energy[load.node] = e
    p_bar = {}
    for gen in instance.generators:
        bar = np.empty((n_blocks, n_days))
        for o, day in enumerate(instance.days):
            if gen.is_solar:
                avail = np.minimum(day.solar_kw[gen.id], gen.capacity)
                bar[:, o] = _block_average(avail, n_blocks)
            else:
                bar[:, o] = gen.capacity
        p_bar[gen.id] = bar

    index = MasterIndex(
        instance=instance,
        block_hours=block_hours,
        n_blocks=n_blocks,
        n_days=n_days,
        include_islanding=include_islanding,
        polygon_sides=polygon_sides,
        weights=np.array([d.weight for d in instance.days]),
        import_price=_block_average(instance.grid.import_price, n_blocks),
        export_price=_block_average(instance.grid.export_price, n_blocks),
        const_p=const_p, const_q=const_q,
        flex_lo=flex_lo, flex_hi=flex_hi, flex_nom=flex_nom, energy=energy,
        p_bar=p_bar,
        tree=_build_tree(instance),
    )

    program = MixedIntegerProgram(name=f"master_{instance.name}")
    asm = _Assembler(program, index, bounds)
    asm.add_investment()
    if include_islanding:
        program.add_var("gamma", lb=0.0, obj=1.0)
    for t, o in ((t, o) for o in range(n_days) for t in range(n_blocks)):
        asm.add_grid_block(t, o)
    asm.add_grid_couplings()
    if include_islanding:
        for t, o in ((t, o) for o in range(n_days) for t in range(n_blocks)):
            asm.add_island_block(t, o)
    return program, index


def _values(outcome: SolveOutcome, program: MixedIntegerProgram,
            names: list[str]) -> dict[str, float]:
    pos = {name: j for j, name in enumerate(program.var_names)}
    return {name: float(outcome.x[pos[name]]) for name in names
            if name in pos}


def extract_solution(outcome: SolveOutcome, program: MixedIntegerProgram,
                     index: MasterIndex) -> MasterSolution:
    """Read the optimum back into planning terms and audit the epigraph."""
    if not outcome.is_optimal:
        raise NotOptimal(f"master ended {outcome.status}")
    pos = {name: j for j, name in enumerate(program.var_names)}

    def val(name: str, default: float | None = None) -> float:
        if name not in pos:
            if default is None:
                raise KeyError(name)
            return default
        return float(outcome.x[pos[name]])

    inst = index.instance
    built_gens = tuple(g.id for g in inst.generators
                       if not g.existing and val(f"zg_{g.id}") > 0.5)
    built_lines = tuple(line.key for line in inst.lines
                        if line.candidate
                        and val(f"zl_{_line_name(line)}") > 0.5)
    invest = sum(g.invest_cost for g in inst.generators
                 if g.id in built_gens)
    invest += sum(line.invest_cost for line in inst.lines
                  if line.key in built_lines)

    shape = (index.n_blocks, index.n_days)
    imports = np.zeros(shape)
    exports = np.zeros(shape)
    generation = {g.id: np.zeros(shape) for g in inst.generators}
    demand = {l.node: np.zeros(shape) for l in inst.loads}
    flexible = {l.node: np.zeros(shape) for l in inst.loads}
    served_const = {l.node: np.ones(shape) for l in inst.loads}
    unserved_flex = {l.node: np.zeros(shape) for l in inst.loads}
    penalty = np.zeros(shape)
    money = index.dollars_per_block
    operation = 0.0
    shift = 0.0
    for t, o in index.slots():
        imports[t, o] = val(f"pb_{t}_{o}")
        exports[t, o] = val(f"ps_{t}_{o}")
        slot_money = index.weights[o] * money
        operation += slot_money * (index.import_price[t] * imports[t, o]
                                   - index.export_price[t] * exports[t, o])
        for gen in inst.generators:
            generation[gen.id][t, o] = val(f"pg_{gen.id}_{t}_{o}")
            operation += slot_money * gen.marginal_cost \
                * generation[gen.id][t, o]
        for load in inst.loads:
            node = load.node
            demand[node][t, o] = val(f"dp_{node}_{t}_{o}")
            flexible[node][t, o] = val(f"dpf_{node}_{t}_{o}")
            if load.flexible_share > 0.0:
                shift += slot_money * load.shift_penalty * (
                    val(f"shp_{node}_{t}_{o}") + val(f"shm_{node}_{t}_{o}"))
            if index.include_islanding:
                y = val(f"y_{node}_{t}_{o}", default=1.0)
                dev = val(f"devm_{node}_{t}_{o}", default=0.0)
                served_const[node][t, o] = y
                unserved_flex[node][t, o] = dev
                penalty[t, o] += load.disconnect_penalty * money * (
                    (1.0 - y) * float(index.const_p[node][t, o]) + dev)

    operation += shift
    gamma = val("gamma") if index.include_islanding else 0.0
    if index.include_islanding:
        worst = float(penalty.max(initial=0.0))
        if abs(gamma - worst) > 1e-6 * (1.0 + abs(gamma)):
            raise NotOptimal(
                f"epigraph loose: gamma {gamma} vs worst penalty {worst}")

    plan = InvestmentPlan(built_gens, built_lines, float(invest))
    return MasterSolution(
        plan=plan, imports=imports, exports=exports, generation=generation,
        demand=demand, flexible=flexible, island_penalty=penalty,
        island_served_const=served_const, island_unserved_flex=unserved_flex,
        gamma=float(gamma), investment_cost=float(invest),
        operation_cost=float(operation), shift_cost=float(shift),
        objective=float(outcome.objective))


def write_variable_map(program: MixedIntegerProgram, path) -> None:
    """Dump name, bounds, integrality, and objective weight per column."""
    _, _, _, c, lb, ub, int_mask = program.to_arrays()
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["name", "lower", "upper", "integer", "objective"])
        for j, name in enumerate(program.var_names):
            writer.writerow([name, lb[j], ub[j], int(int_mask[j]), c[j]])
