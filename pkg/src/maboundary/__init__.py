"""Sharp boundary estimates for singular and degenerate Monge-Ampere equations.

Library + CLI implementing, at desk scale, the boundary-decay machinery for

    det D^2 u = |u|^(-n-k-2) (x . Du - u)^(-k)      (singular problem)
    det D^2 u = |u|^q                               (degenerate problem)

on anisotropically convex domains: explicit barrier construction and
certification, sharp-exponent formulas, monotone wide-stencil grid solvers,
radial shooting oracles, Monge-Ampere measures of piecewise-linear convex
functions, and boundary-exponent fitting.
"""

from . import barriers, exponents, geometry, ma_measure, solver
from .errors import MABoundaryError

__version__ = "0.1.0"

__all__ = [
    "MABoundaryError",
    "barriers",
    "exponents",
    "geometry",
    "ma_measure",
    "solver",
    "__version__",
]
