"""Scalar calculus of the sharp boundary exponents and their geometric iterations.

The two problems handled by this package come with closed-form decay
exponents built from the anisotropy numbers a_1..a_{n-1} through the
aggregate index ``abar = sum(2/a_i)``:

* singular problem: theta = (abar + 2 + k) / (2n + 2k + 2),
* degenerate problem: alpha = (abar + 2) / (n - q), approached by the
  affine iteration lam_{j+1} = q*lam_j/n + (abar+2)/n whose deviations
  from alpha shrink by exactly q/n per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import HypothesisViolationError, InvalidProfileError, OutOfRangeError

#: Anisotropy exponents at or above this value encode the flat limit a_i = +inf.
A_CAP = 1e9

#: Contributions 2/a_i below this are snapped to exactly 0 (flat direction).
FLAT_TOL = 1e-8


def _check_a(a: Sequence[float]) -> tuple[float, ...]:
    a = tuple(float(v) for v in a)
    if not a:
        raise InvalidProfileError("need at least one anisotropy exponent")
    for v in a:
        if not v >= 1.0:
            raise InvalidProfileError(f"anisotropy exponent {v} < 1")
    return a


@dataclass(frozen=True)
class ExponentContext:
    """Dimension, problem parameters and anisotropy data for exponent formulas.

    ``k`` belongs to the singular problem, ``q`` to the degenerate one; either
    may be absent when not needed.  ``a`` holds the n-1 anisotropy exponents
    (values >= A_CAP stand for the flat limit).
    """

    n: int
    a: tuple[float, ...]
    k: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise OutOfRangeError(f"dimension n={self.n} < 2")
        a = _check_a(self.a)
        if len(a) != self.n - 1:
            raise InvalidProfileError(
                f"expected {self.n - 1} anisotropy exponents, got {len(a)}"
            )
        object.__setattr__(self, "a", a)
        if self.k is not None and not self.k > 0:
            raise OutOfRangeError(f"k={self.k} must be positive")
        if self.q is not None and not 0.0 <= self.q < self.n:
            raise OutOfRangeError(f"q={self.q} outside [0, n={self.n})")

    @property
    def abar(self) -> float:
        return abar(self.a)

    def require_k(self) -> float:
        if self.k is None:
            raise OutOfRangeError("context has no singular parameter k")
        return self.k

    def require_q(self) -> float:
        if self.q is None:
            raise OutOfRangeError("context has no degenerate parameter q")
        return self.q


def abar(a: Sequence[float]) -> float:
    """Aggregate convexity index sum(2/a_i), with flat directions contributing 0.

    Contributions are added in sorted order so the result is exactly
    permutation-invariant.
    """
    a = _check_a(a)
    contribs = sorted(2.0 / v for v in a if 2.0 / v >= FLAT_TOL)
    total = 0.0
    for c in contribs:
        total += c
    return total


def _abar_fraction(a: Sequence[float]) -> Fraction:
    # Exact rational abar for regime classification; floats convert exactly.
    total = Fraction(0)
    for v in a:
        c = 2.0 / v
        if c >= FLAT_TOL:
            total += Fraction(2) / Fraction(v)
    return total


def theta(ctx: ExponentContext) -> float:
    """Sharp exponent (abar + 2 + k) / (2n + 2k + 2) of the singular problem.

    Requires every finite a_i >= 2 (estimate hypothesis).
    """
    k = ctx.require_k()
    for v in ctx.a:
        if v < 2.0:
            raise HypothesisViolationError(
                f"singular-problem exponent requires a_i >= 2, got {v}"
            )
    return (abar(ctx.a) + 2.0 + k) / (2.0 * ctx.n + 2.0 * k + 2.0)


def alpha(ctx: ExponentContext) -> float:
    """Fixed point (abar + 2) / (n - q) of the degenerate-problem iteration."""
    q = ctx.require_q()
    return (abar(ctx.a) + 2.0) / (ctx.n - q)


@dataclass(frozen=True)
class RegimeReport:
    """Which upper-estimate clause applies and the best exponent it yields."""

    case: str
    lambda_sup: float
    attained: bool  # False means every exponent below lambda_sup is admissible
    abar: float
    alpha: float
    margin: float  # exact value of n - abar - 2 used for the classification


def upper_exponent_regime(ctx: ExponentContext) -> RegimeReport:
    """Classify the degenerate problem's upper-bound regime.

    q = 0 with n - abar - 2 > 0 gives the attained exponent (abar+2)/n;
    0 < q < n - abar - 2 gives the open supremum alpha; otherwise every
    exponent below 1 works.  Boundaries are decided by exact rational
    comparison, with ties routed to the weaker (larger supremum) clause.
    """
    q = ctx.require_q()
    ab_exact = _abar_fraction(ctx.a)
    margin = Fraction(ctx.n) - ab_exact - 2  # n - abar - 2
    ab = abar(ctx.a)
    al = alpha(ctx)
    q_exact = Fraction(q)

    if q_exact == 0:
        if margin > 0:
            return RegimeReport("1.4(1)-strict", (ab + 2.0) / ctx.n, True, ab, al, float(margin))
        return RegimeReport("1.4(1)-flat", 1.0, False, ab, al, float(margin))
    if q_exact < margin:
        return RegimeReport("1.4(2)-subcritical", al, False, ab, al, float(margin))
    return RegimeReport("1.4(2)-supercritical", 1.0, False, ab, al, float(margin))


@dataclass(frozen=True)
class LambdaSequence:
    """Trajectory of the exponent-improvement iteration.

    ``gaps[j]`` carries lam_j - alpha computed multiplicatively, so the
    geometric relation |lam_{j+1} - alpha| = (q/n)|lam_j - alpha| survives
    in floating point even when lam_j is indistinguishable from alpha;
    ``values[j] = alpha + gaps[j]`` is the plain iterate.
    """

    lambda0: float
    ratio: float
    alpha: float
    values: list[float] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)


def lambda_iterate(ctx: ExponentContext, lambda0: float, steps: int) -> LambdaSequence:
    """Run lam_{j+1} = q*lam_j/n + (abar+2)/n for ``steps`` steps from lambda0."""
    q = ctx.require_q()
    if not lambda0 > 0:
        raise OutOfRangeError(f"lambda0={lambda0} must be positive")
    if steps < 0:
        raise OutOfRangeError("steps must be >= 0")
    al = alpha(ctx)
    ratio = q / ctx.n
    gaps = [lambda0 - al]
    for _ in range(steps):
        gaps.append(gaps[-1] * ratio)
    values = [al + g for g in gaps]
    values[0] = lambda0
    return LambdaSequence(lambda0=lambda0, ratio=ratio, alpha=al, values=values, gaps=gaps)


def paper_lambda0(ctx: ExponentContext, direction: str) -> float:
    """Canonical starting exponent: (abar+2)/n upward, (q+abar+2)/n downward."""
    q = ctx.require_q()
    ab = abar(ctx.a)
    if direction == "upward":
        return (ab + 2.0) / ctx.n
    if direction == "downward":
        return (q + ab + 2.0) / ctx.n
    raise OutOfRangeError(f"unknown iteration direction {direction!r}")


def steps_to_reach(ctx: ExponentContext, lambda0: float, target_lambda: float) -> int:
    """Smallest j with |lam_j - alpha| <= |target - alpha| for the iteration.

    The target must lie between lambda0 and the fixed point (inclusive of
    lambda0, exclusive of alpha unless q = 0 where one step lands exactly).
    """
    q = ctx.require_q()
    al = alpha(ctx)
    gap0 = lambda0 - al
    gap_t = target_lambda - al
    if gap0 == 0.0:
        return 0
    # target on the same side of alpha and no farther than lambda0
    if gap_t * gap0 < 0.0 or abs(gap_t) > abs(gap0):
        raise OutOfRangeError(
            f"target {target_lambda} not between lambda0={lambda0} and alpha={al}"
        )
    if abs(gap_t) == abs(gap0):
        return 0
    if q == 0.0:
        return 1  # one step lands exactly on alpha
    if gap_t == 0.0:
        raise OutOfRangeError("fixed point is reached only in the limit for q > 0")
    ratio = q / ctx.n
    gap = abs(gap0)
    limit = abs(gap_t)
    j = 0
    while gap > limit:
        gap *= ratio
        j += 1
    return j
