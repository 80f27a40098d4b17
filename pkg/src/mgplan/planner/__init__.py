"""Stage-1 master problem: investment plus grid-connected and islanded
operation, tied together by the worst-case islanding penalty."""
from .bounds import ExchangeBounds, InfeasibleBounds, UnboundedExchange
from .master import (InvestmentPlan, MasterIndex, MasterSolution, NotOptimal,
                     build_master, extract_solution, write_variable_map)
from .polygon import DegenerateCapacity, polygon_linearize

__all__ = [
    "DegenerateCapacity",
    "ExchangeBounds",
    "InfeasibleBounds",
    "InvestmentPlan",
    "MasterIndex",
    "MasterSolution",
    "NotOptimal",
    "UnboundedExchange",
    "build_master",
    "extract_solution",
    "polygon_linearize",
    "write_variable_map",
]
