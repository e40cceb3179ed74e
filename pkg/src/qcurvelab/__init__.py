"""Radial prescribed Q-curvature solutions and their geometry."""

from .curvature import PrescribedCurvature
from .grid import RadialGrid
from .potential import RadialDensity, alpha_of, log_potential
from .solver import ConformalSolution, SolverOptions, picard_solve, sweep_C0

__all__ = [
    "PrescribedCurvature",
    "RadialGrid",
    "RadialDensity",
    "alpha_of",
    "log_potential",
    "ConformalSolution",
    "SolverOptions",
    "picard_solve",
    "sweep_C0",
]
__version__ = "0.1.0"
