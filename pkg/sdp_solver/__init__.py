"""
SDP Solver

Dense primal-dual interior point solver that decides strict feasibility of small
block SDPs by maximizing the smallest Gram eigenvalue under a trace cap.
"""

from .models import SolverSettings, SolveStatus, SdpSolution, DimensionCapError
from .linalg import min_eigenvalue, nt_scaling, max_step, is_positive_definite
from .interior_point import InteriorPointMethod, IpmState
from .solver import SdpSolver, solve

__version__ = "1.0.0"
__all__ = [
    "SolverSettings", "SolveStatus", "SdpSolution", "DimensionCapError",
    "min_eigenvalue", "nt_scaling", "max_step", "is_positive_definite", "InteriorPointMethod", "IpmState",
    "SdpSolver", "solve",
]
