"""Exception hierarchy shared by all maboundary modules."""


class MABoundaryError(Exception):
    """Base class for all errors raised by this package."""


class InvalidProfileError(MABoundaryError, ValueError):
    """Anisotropy data violates its invariants (a_i < 1, bad lengths, ...)."""


class HypothesisViolationError(MABoundaryError, ValueError):
    """Inputs violate the hypotheses of the estimate being exercised."""


class OutOfRangeError(MABoundaryError, ValueError):
    """A scalar parameter is outside its admissible range."""


class GeometryDomainError(MABoundaryError, ValueError):
    """A query point lies outside the closure of the domain."""


class RayExitError(MABoundaryError, ValueError):
    """A requested normal-ray depth leaves the nearest-boundary regime."""


class BarrierDomainError(MABoundaryError, ValueError):
    """Barrier evaluated outside its admissible region."""


class NotConvexHereError(MABoundaryError, ArithmeticError):
    """Hessian factorization hit a non-positive pivot."""


class AssumptionViolationError(MABoundaryError, ArithmeticError):
    """A standing positivity assumption (drift term, x.Du - u) failed."""


class EpsilonSelectionError(MABoundaryError, RuntimeError):
    """No admissible barrier scale found above the search floor."""


class BoundaryNodeError(MABoundaryError, ValueError):
    """Monge-Ampere mass requested at a boundary node."""


class ComparisonHypothesisError(MABoundaryError, ValueError):
    """Comparison-principle hypotheses (boundary order / mass order) fail."""


class ConvergenceError(MABoundaryError, RuntimeError):
    """Iteration failed to reach its tolerance within the cap."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class DegenerateFixedPointError(MABoundaryError, RuntimeError):
    """Fixed-point iteration collapsed to the trivial zero solution."""


class WindowTooDeepError(MABoundaryError, ValueError):
    """Exponent-fit window contains values at the numerical noise floor."""


class ShootingBracketError(MABoundaryError, RuntimeError):
    """Radial shooting could not bracket the boundary condition."""


class ConfigError(MABoundaryError, ValueError):
    """Experiment configuration is malformed or inconsistent."""
