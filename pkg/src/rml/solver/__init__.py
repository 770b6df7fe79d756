"""LP/MIP engine: dual simplex, branch-and-bound, LP-format export."""

from .bnb import solve_mip
from .lpformat import export_lp_format
from .model import LpModel, MipModel, SolveResult, SolverConfig, Status
from .simplex import solve_lp

__all__ = [
    "LpModel",
    "MipModel",
    "SolveResult",
    "SolverConfig",
    "Status",
    "export_lp_format",
    "solve_lp",
    "solve_mip",
]
