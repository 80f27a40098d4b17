"""Self-contained LP/MILP machinery: program container, simplex, branch and
bound, MPS serialization."""
from .branch_bound import NodeLimitNoIncumbent, solve_milp
from .mps import export_mps, read_mps
from .program import (MixedIntegerProgram, ProgramError, SolveOutcome,
                      SolveStatus)
from .simplex import NumericalFailure, solve_lp

__all__ = [
    "MixedIntegerProgram",
    "ProgramError",
    "SolveOutcome",
    "SolveStatus",
    "NumericalFailure",
    "NodeLimitNoIncumbent",
    "solve_lp",
    "solve_milp",
    "export_mps",
    "read_mps",
]
