"""Grid solver, fixed-point outer loops, radial oracles and exponent fitting."""

from .fitting import ExponentFit, fit_boundary_exponent, fit_loglog
from .problems import solve_degenerate, solve_singular, solve_with_continuation
from .radial import RadialProfile, radial_oracle
from .stencil import (
    GridFunction,
    SolveReport,
    StencilOperator,
    ma_solve,
    min_second_difference,
)

__all__ = [
    "ExponentFit",
    "GridFunction",
    "RadialProfile",
    "SolveReport",
    "StencilOperator",
    "fit_boundary_exponent",
    "fit_loglog",
    "ma_solve",
    "min_second_difference",
    "radial_oracle",
    "solve_degenerate",
    "solve_singular",
    "solve_with_continuation",
]
