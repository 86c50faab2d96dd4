"""Viscous Burgers' equation on a bounded interval, solved exactly in the
Laplace domain through the Hopf-Cole transformation and inverted numerically.
"""

from .engine import SolutionTable, SpaceTimeGrid, error_norms, solve
from .ilt import IltConfig, IltResult, Status, invert, invert_field
from .operational import (
    LaplaceField, build_field, r_transform, r_transform_dx, solve_boundary_system)
from .problem import (
    BurgersProblem, InitialProfile, ReactionDiffusionProblem, hopf_cole_initial,
    hopf_cole_ratio, validate)
from .quadrature import QuadratureSpec, integrate

__all__ = [
    "BurgersProblem", "IltConfig", "IltResult", "InitialProfile", "LaplaceField",
    "QuadratureSpec", "ReactionDiffusionProblem", "SolutionTable", "SpaceTimeGrid",
    "Status", "build_field", "error_norms", "hopf_cole_initial", "hopf_cole_ratio",
    "integrate", "invert", "invert_field", "r_transform", "r_transform_dx", "solve",
    "solve_boundary_system", "validate",
]
