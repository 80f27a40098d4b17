"""Domain types for a microgrid planning instance.

All types are frozen; transformations produce new instances.  Power fields
are kilowatt-scale until `to_per_unit` rebases them; costs stay in currency
per kWh regardless of normalization (the planner converts at objective
assembly, which keeps the transform invertible without touching prices).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

HOURS = 24


class GeneratorKind(str, Enum):
    SG = "SG"
    CIG_VSM = "CIG_VSM"
    CIG_DROOP = "CIG_Droop"
    CIG_GRID_FEEDING = "CIG_GridFeeding"


@dataclass(frozen=True)
class Node:
    id: int
    is_pcc: bool = False


@dataclass(frozen=True)
class LineAsset:
    from_node: int
    to_node: int
    r: float                      # p.u. resistance
    x: float                      # p.u. reactance
    s_max: float                  # apparent-power capacity, kVA
    built_initially: bool = True
    candidate: bool = False
    invest_cost: float = 0.0      # currency/yr when candidate

    @property
    def key(self) -> tuple[int, int]:
        return (self.from_node, self.to_node)


@dataclass(frozen=True)
class GeneratorAsset:
    """One dispatchable or renewable unit.

    Dynamic parameters are kind-specific:
      SG             inertia, damping, gain, droop, turbine_fraction, turbine_time
      CIG_VSM        inertia, damping, response_time
      CIG_Droop      gain, droop, response_time
      CIG_GridFeeding  none (no frequency support)
    On an un-normalized instance they are expressed on the unit's own rating;
    `to_per_unit` rebases inertia/damping/droop to the system base.
    """
    id: str
    node: int
    kind: GeneratorKind
    capacity: float               # kW
    marginal_cost: float          # currency/kWh
    invest_cost: float = 0.0      # currency/yr
    existing: bool = False
    power_factor: float = 0.95
    is_solar: bool = False        # output capped by the day's availability profile
    ramp_up: float | None = None          # kW per hour, SG only
    ramp_down: float | None = None        # kW per hour, SG only
    daily_capacity_factor: float | None = None  # SG only
    inertia: float | None = None          # s on own rating
    damping: float | None = None          # p.u. on own rating
    gain: float | None = None             # governor / droop-loop gain
    droop: float | None = None            # p.u. speed droop on own rating
    turbine_fraction: float | None = None  # high-pressure stage fraction
    turbine_time: float | None = None     # s
    response_time: float | None = None    # converter filter time constant, s

    @property
    def reactive_limit(self) -> float:
        """Symmetric reactive band from the power-factor angle, same units
        as capacity."""
        pf = self.power_factor
        return self.capacity * float(np.tan(np.arccos(pf)))


# hourly flexible band around the nominal flexible profile
FLEX_FLOOR = 0.5
FLEX_CEILING = 1.5


@dataclass(frozen=True)
class LoadSpec:
    """Demand at one node, split into a constant and a shiftable part.

    The hourly series themselves live on the representative days; this type
    carries the split rule and the penalty prices.  The flexible part may be
    rescheduled within [FLEX_FLOOR, FLEX_CEILING] times its nominal hourly
    value while conserving daily energy.
    """
    node: int
    power_factor: float
    nominal_kva: float = 0.0      # rated apparent demand, scales synthesis
    flexible_share: float = 0.0   # fraction of the hourly demand that can shift
    shift_penalty: float = 0.0    # currency/kWh on deviation from nominal
    disconnect_penalty: float = 150.0  # currency/kWh of unserved demand
    critical: bool = False

    def constant_active(self, total_kw: np.ndarray) -> np.ndarray:
        return (1.0 - self.flexible_share) * total_kw

    def flexible_nominal(self, total_kw: np.ndarray) -> np.ndarray:
        return self.flexible_share * total_kw

    def flexible_bounds(self, total_kw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nominal = self.flexible_nominal(total_kw)
        return FLEX_FLOOR * nominal, FLEX_CEILING * nominal

    def reactive_of(self, active: np.ndarray) -> np.ndarray:
        return active * float(np.tan(np.arccos(self.power_factor)))

    def daily_flexible_energy(self, total_kw: np.ndarray) -> float:
        return float(np.sum(self.flexible_nominal(total_kw)))


@dataclass(frozen=True)
class GridInterface:
    import_price: np.ndarray      # currency/kWh, shape (24,)
    export_price: np.ndarray      # currency/kWh, shape (24,)
    import_limit: float           # kW
    export_limit: float           # kW
    import_limit_q: float         # kVAr
    export_limit_q: float         # kVAr
    frequency: float = 50.0       # Hz
    s_base: float = 1000.0        # kVA

    @staticmethod
    def flat(import_price: float, export_price: float, import_limit: float,
             export_limit: float, import_limit_q: float, export_limit_q: float,
             frequency: float = 50.0, s_base: float = 1000.0) -> "GridInterface":
        return GridInterface(np.full(HOURS, float(import_price)),
                             np.full(HOURS, float(export_price)),
                             import_limit, export_limit,
                             import_limit_q, export_limit_q,
                             frequency, s_base)


@dataclass(frozen=True)
class SecurityLimits:
    """Transient-frequency thresholds, all positive magnitudes in Hz units."""
    rocof: float                  # Hz/s
    nadir: float                  # Hz
    steady_state: float           # Hz


@dataclass(frozen=True)
class RepresentativeDay:
    """Weighted centroid day: total load per node and solar availability per
    unit, both hourly."""
    weight: float                 # days of the year this centroid stands for
    load_kw: dict[int, np.ndarray] = field(default_factory=dict)
    solar_kw: dict[str, np.ndarray] = field(default_factory=dict)
    member_count: int = 0


@dataclass(frozen=True)
class PlanningInstance:
    nodes: tuple[Node, ...]
    lines: tuple[LineAsset, ...]
    generators: tuple[GeneratorAsset, ...]
    loads: tuple[LoadSpec, ...]
    grid: GridInterface
    limits: SecurityLimits
    days: tuple[RepresentativeDay, ...]
    v_min: float = 0.95
    v_max: float = 1.05
    per_unit: bool = False
    name: str = "instance"

    @property
    def pcc(self) -> Node:
        return next(n for n in self.nodes if n.is_pcc)

    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def generator(self, gen_id: str) -> GeneratorAsset:
        return next(g for g in self.generators if g.id == gen_id)

    def load_at(self, node: int) -> LoadSpec | None:
        for load in self.loads:
            if load.node == node:
                return load
        return None

    def with_grid(self, **changes) -> "PlanningInstance":
        return replace(self, grid=replace(self.grid, **changes))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def __str__(self) -> str:
        if self.ok:
            return "instance OK"
        return "\n".join(self.violations)
