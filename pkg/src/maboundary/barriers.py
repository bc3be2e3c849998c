"""Explicit convex barriers and their numerical certification.

Three barrier families are implemented:

* the power-type supersolution barrier
  W(x) = -sum_i [ (x_n/eps)^(2/a_i) - x_i^2 ]^(1/b_i),  b_i = 2/(a_i * exponent),
  whose composite functional
  H[W] = det D^2 W * |W|^(n+k+2) * ((x + y0) . DW - W)^k
  certifies the singular problem's upper decay bound once H > 1 on the
  model region for a small enough scale eps;
* the same family with exponent lambda for the degenerate problem, where the
  certificate is a pointwise lower bound on det D^2 W alone;
* the quadratic ellipsoid barrier on
  E = { sum_i x_i^2/A_i^2 + (x_n - 3h/4)^2/A_n^2 <= 1 } with constant Hessian
  and closed-form determinant eps^n 2^n c^(-2n) eta^abar h^(-abar-2),
  driving the lower (non-decay) bounds.

All certificates are sampling-based with deterministic seeding; reports
carry every intermediate scale so a failure is diagnosable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolationError,
    BarrierDomainError,
    EpsilonSelectionError,
    HypothesisViolationError,
    InvalidProfileError,
    NotConvexHereError,
    OutOfRangeError,
)
from .exponents import A_CAP, ExponentContext, abar, theta
from .geometry import AnisotropyProfile


@dataclass(frozen=True)
class PowerBarrierSpec:
    """Parameters of the power-type barrier W = -sum_i g_i^(1/b_i).

    ``exponent`` is the decay power certified by the barrier (theta for the
    singular problem, lambda for the degenerate one); ``y0`` is the drift
    shift (the pre-normalization boundary point), zero when unused.
    """

    profile: AnisotropyProfile
    exponent: float
    epsilon: float
    y0: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.exponent < 1.0:
            raise OutOfRangeError(f"barrier exponent {self.exponent} outside (0, 1)")
        if any(a >= A_CAP for a in self.profile.a):
            raise InvalidProfileError("power barrier requires finite anisotropy exponents")
        if not 0.0 < self.epsilon < min(self.profile.eta):
            raise OutOfRangeError(
                f"epsilon={self.epsilon} must lie in (0, min eta)={min(self.profile.eta)}"
            )
        y0 = tuple(float(v) for v in self.y0) if self.y0 else (0.0,) * self.dim
        if len(y0) != self.dim:
            raise OutOfRangeError(f"y0 must have dimension {self.dim}")
        object.__setattr__(self, "y0", y0)

    @property
    def dim(self) -> int:
        return self.profile.dim

    @property
    def b(self) -> tuple[float, ...]:
        return tuple(2.0 / (a * self.exponent) for a in self.profile.a)

    def delta(self) -> float:
        """Deficiency max_i (eps/eta_i)^(2/a_i) of the model-region inclusion."""
        return max(
            (self.epsilon / e) ** (2.0 / a) for a, e in zip(self.profile.a, self.profile.eta)
        )


@dataclass
class BarrierJet:
    """Value, gradient and Hessian of a barrier at one point, plus diagnostics."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _jet_arrays(spec: PowerBarrierSpec, X: np.ndarray):
    """Vectorized value/gradient/Hessian pieces of the power barrier.

    Returns (W, DW, Hdiag, Hmix, Hnn, xi, valid); entries at invalid rows
    (outside the admissible region) are NaN.
    """
    a = np.array(spec.profile.a)
    p = 2.0 / a  # (n-1,)
    q = 1.0 / np.array(spec.b)  # q_i = a_i * exponent / 2
    eps = spec.epsilon

    X = np.atleast_2d(np.asarray(X, dtype=float))
    xp = X[:, :-1]
    xn = X[:, -1]

    valid = xn > 0.0
    t = np.where(valid, xn, 1.0)[:, None] / eps  # placeholder rows stay finite
    s = t ** p[None, :]  # (x_n/eps)^(2/a_i)
    g = s - xp**2
    valid &= np.all(g > 0.0, axis=1)

    g = np.where(g > 0.0, g, np.nan)
    gq = g**q[None, :]
    gq1 = g ** (q[None, :] - 1.0)
    gq2 = g ** (q[None, :] - 2.0)

    W = -np.sum(gq, axis=1)
    DW = np.empty_like(X)
    DW[:, :-1] = 2.0 * q[None, :] * xp * gq1
    DW[:, -1] = -np.sum(q[None, :] * p[None, :] / eps * t ** (p[None, :] - 1.0) * gq1, axis=1)

    Hdiag = 2.0 * q[None, :] * gq1 + 4.0 * q[None, :] * (1.0 - q[None, :]) * xp**2 * gq2
    Hmix = (
        -2.0
        * p[None, :]
        * q[None, :]
        * (1.0 - q[None, :])
        * xp
        * gq2
        * t ** (p[None, :] - 1.0)
        / eps
    )
    Hnn = np.sum(
        q[None, :] * p[None, :] * (1.0 - p[None, :]) / eps**2 * t ** (p[None, :] - 2.0) * gq1
        + q[None, :] * p[None, :] ** 2 * (1.0 - q[None, :]) / eps**2
        * t ** (2.0 * p[None, :] - 2.0) * gq2,
        axis=1,
    )
    xi = gq * t ** (-spec.exponent)
    return W, DW, Hdiag, Hmix, Hnn, xi, valid


def _det_arrays(Hdiag, Hmix, Hnn):
    """Schur-factorized determinant of the arrow Hessian, vectorized.

    Returns (det, convex) where convex flags positive pivots and Schur
    complement.
    """
    convex = np.all(Hdiag > 0.0, axis=1)
    safe = np.where(Hdiag > 0.0, Hdiag, np.nan)
    schur = Hnn - np.sum(Hmix**2 / safe, axis=1)
    convex &= schur > 0.0
    det = np.prod(Hdiag, axis=1) * schur
    return det, convex


def power_barrier_jet(spec: PowerBarrierSpec, x) -> BarrierJet:
    """Closed-form jet of the power barrier at an admissible point.

    The Hessian has arrow structure: diagonal in the first n-1 slots plus a
    last row/column.  Diagnostics carry delta(eps), the normalized factors
    xi_i = |W_i| (x_n/eps)^(-exponent) and the Schur determinant.
    """
    X = np.asarray(x, dtype=float)[None, :]
    if X.shape[1] != spec.dim:
        raise BarrierDomainError(f"expected a point of dimension {spec.dim}")
    W, DW, Hdiag, Hmix, Hnn, xi, valid = _jet_arrays(spec, X)
    if not valid[0]:
        raise BarrierDomainError(
            f"point {x} outside the admissible region (x_n/eps)^(2/a_i) > x_i^2, x_n > 0"
        )
    n = spec.dim
    H = np.zeros((n, n))
    H[np.arange(n - 1), np.arange(n - 1)] = Hdiag[0]
    H[:-1, -1] = Hmix[0]
    H[-1, :-1] = Hmix[0]
    H[-1, -1] = Hnn[0]
    det, convex = _det_arrays(Hdiag, Hmix, Hnn)
    return BarrierJet(
        value=float(W[0]),
        gradient=DW[0],
        hessian=H,
        diagnostics={
            "delta": spec.delta(),
            "xi": xi[0],
            "detD2W": float(det[0]) if convex[0] else float("nan"),
            "convex": bool(convex[0]),
        },
    )


def det_hessian(jet: BarrierJet) -> float:
    """Determinant of the jet's arrow Hessian via its Schur factorization."""
    H = jet.hessian
    n = H.shape[0]
    diag = np.diag(H)[: n - 1]
    if np.any(diag <= 0.0):
        raise NotConvexHereError("non-positive diagonal pivot in barrier Hessian")
    v = H[: n - 1, n - 1]
    schur = H[n - 1, n - 1] - float(np.sum(v**2 / diag))
    return float(np.prod(diag) * schur)


def H_functional(spec: PowerBarrierSpec, ctx: ExponentContext, x) -> float:
    """Composite certificate H[W] = det D^2 W |W|^(n+k+2) ((x+y0).DW - W)^k."""
    k = ctx.require_k()
    jet = power_barrier_jet(spec, x)
    det = det_hessian(jet)
    drift = float((np.asarray(x, dtype=float) + np.array(spec.y0)) @ jet.gradient) - jet.value
    if drift <= 0.0:
        raise AssumptionViolationError(
            f"drift term (x+y0).DW - W = {drift:.3e} is not positive at {x}"
        )
    n = spec.dim
    return det * abs(jet.value) ** (n + k + 2.0) * drift**k


@dataclass
class EpsilonReport:
    """Certified barrier scale with all intermediate selection quantities."""

    epsilon0: float
    epsilon1: float
    epsilon2: float
    delta: float
    min_H: float
    samples: int
    h_samples: np.ndarray | None = None


def _sample_model_region(profile, count, xn_max, rng, xn_min_frac=1e-8):
    """Points with x_n log-uniform in (xn_min_frac*xn_max, xn_max) and each
    |x_i| below the single-constraint section (x_n/eta_i)^(1/a_i)."""
    a = np.array(profile.a)
    eta = np.array(profile.eta)
    xn = xn_max * np.exp(rng.uniform(math.log(xn_min_frac), 0.0, size=count))
    s = rng.uniform(-1.0, 1.0, size=(count, a.size))
    xp = s * (xn[:, None] / eta[None, :]) ** (1.0 / a[None, :])
    return np.column_stack([xp, xn])


def _certify_H(spec, ctx, count, xn_max, rng):
    """Min of H[W] over a fresh sample of the model region; -inf if invalid."""
    X = _sample_model_region(spec.profile, count, xn_max, rng)
    W, DW, Hdiag, Hmix, Hnn, _, valid = _jet_arrays(spec, X)
    det, convex = _det_arrays(Hdiag, Hmix, Hnn)
    drift = np.sum((X + np.array(spec.y0)[None, :]) * DW, axis=1) - W
    ok = valid & convex & (drift > 0.0)
    if not np.all(ok):
        return -math.inf, np.full(count, -math.inf)
    k = ctx.require_k()
    n = spec.dim
    H = det * np.abs(W) ** (n + k + 2.0) * drift**k
    return float(np.min(H)), H


def epsilon_one(profile: AnisotropyProfile, d0: float, diam: float) -> float:
    """Largest scale for which the drift estimate absorbs the diam^2 term."""
    vals = [
        (d0 * diam ** (2.0 / a - 1.0) / (2.0 * a * diam**2)) ** (a / 2.0)
        for a in profile.a
    ]
    return min(vals)


def epsilon_two(profile: AnisotropyProfile, exponent: float) -> float:
    """Largest scale keeping the deficiency below 1 - exponent.

    Solves delta(eps) < 1 - exponent exactly: eps < eta_i (1-exponent)^(a_i/2)
    for every i.  Any smaller value works equally well.
    """
    return min(e * (1.0 - exponent) ** (a / 2.0) for a, e in zip(profile.a, profile.eta))


def select_epsilon(
    ctx: ExponentContext,
    profile: AnisotropyProfile,
    d0: float,
    diam: float,
    sample_count: int = 10_000,
    seed: int = 0,
    floor: float = 1e-12,
) -> EpsilonReport:
    """Largest certified barrier scale for the singular-problem estimate.

    Searches a logarithmic grid (ratio 2) below min(eps1, eps2, min eta),
    refines by bisection to three significant digits, and re-certifies the
    winner on a fresh sample of ``sample_count`` points with min H[W] > 1.
    """
    k = ctx.require_k()
    if any(a < 2.0 for a in ctx.a):
        raise HypothesisViolationError("singular-problem barrier requires all a_i >= 2")
    if not (d0 > 0.0 and diam > d0):
        raise OutOfRangeError(f"need 0 < d0 < diam, got d0={d0}, diam={diam}")
    th = theta(ctx)
    eps1 = epsilon_one(profile, d0, diam)
    eps2 = epsilon_two(profile, th)
    cap = min(eps1, eps2, min(profile.eta)) * (1.0 - 1e-9)
    y0 = (0.0,) * (ctx.n - 1) + (-d0,)

    ss = np.random.SeedSequence(seed)
    search_rng = np.random.default_rng(ss.spawn(1)[0])
    search_count = min(sample_count, 4000)

    def passes(eps, count, rng):
        spec = PowerBarrierSpec(profile=profile, exponent=th, epsilon=eps, y0=y0)
        min_h, hs = _certify_H(spec, ctx, count, diam, rng)
        return min_h > 1.0, min_h, hs

    eps = cap
    ok, _, _ = passes(eps, search_count, search_rng)
    if ok:
        lo_pass = eps
        hi_fail = None
    else:
        hi_fail = eps
        while True:
            eps *= 0.5
            if eps < floor:
                raise EpsilonSelectionError(
                    f"no certified scale above {floor:g}: eps1={eps1:.3e}, "
                    f"eps2={eps2:.3e}, theta={th:.6f}"
                )
            ok, _, _ = passes(eps, search_count, search_rng)
            if ok:
                lo_pass = eps
                break
            hi_fail = eps
    if hi_fail is not None:
        while hi_fail / lo_pass > 1.001:
            mid = math.sqrt(hi_fail * lo_pass)
            ok, _, _ = passes(mid, search_count, search_rng)
            if ok:
                lo_pass = mid
            else:
                hi_fail = mid

    # fresh certification of the selected scale; back off if borderline
    final_rng = np.random.default_rng(ss.spawn(2)[1])
    eps0 = lo_pass
    for _ in range(8):
        ok, min_h, hs = passes(eps0, sample_count, final_rng)
        if ok:
            spec = PowerBarrierSpec(profile=profile, exponent=th, epsilon=eps0, y0=y0)
            return EpsilonReport(
                epsilon0=eps0,
                epsilon1=eps1,
                epsilon2=eps2,
                delta=spec.delta(),
                min_H=min_h,
                samples=sample_count,
                h_samples=hs,
            )
        eps0 *= 0.8
        if eps0 < floor:
            break
    raise EpsilonSelectionError("fresh-sample certification failed down to the floor")


@dataclass
class DegenerateBarrierReport:
    case: str
    lam: float
    exponent: float  # n*lambda - abar - 2
    epsilon: float
    delta: float
    min_det: float
    m_rhs: float
    samples: int
    passed: bool


def degenerate_barrier_check(
    ctx: ExponentContext,
    profile: AnisotropyProfile,
    lam: float,
    M_rhs: float,
    sample_count: int = 10_000,
    diam: float = 1.0,
    seed: int = 0,
    floor: float = 1e-12,
) -> DegenerateBarrierReport:
    """Certify det D^2 W >= M_rhs for the degenerate-problem power barrier.

    Case 1 (n - abar - 2 > 0) requires the exact exponent lambda = (abar+2)/n,
    where n*lambda - abar - 2 = 0 makes the lower bound x_n-uniform.  Case 2
    (n - abar - 2 <= 0) accepts any lambda in (abar/n, 1); the analytic bound
    then degrades by (diam/eps)^(n*lambda - abar - 2) < 1.
    """
    ctx.require_q()
    ab = abar(profile.a)
    margin = ctx.n - ab - 2.0
    exponent = ctx.n * lam - ab - 2.0
    if not 0.0 < lam < 1.0:
        raise HypothesisViolationError(f"lambda={lam} outside (0, 1)")
    if margin > 0.0:
        case = "case1"
        if abs(lam - (ab + 2.0) / ctx.n) > 1e-12:
            raise HypothesisViolationError(
                f"case 1 requires lambda = (abar+2)/n = {(ab + 2.0) / ctx.n}, got {lam}"
            )
    else:
        case = "case2"
        if not lam > ab / ctx.n:
            raise HypothesisViolationError(
                f"case 2 requires lambda > abar/n = {ab / ctx.n}, got {lam}"
            )

    cap = min(min(profile.eta), epsilon_two(profile, lam)) * (1.0 - 1e-9)
    ss = np.random.SeedSequence(seed)
    search_rng = np.random.default_rng(ss.spawn(1)[0])

    def min_det_at(eps, count, rng):
        spec = PowerBarrierSpec(profile=profile, exponent=lam, epsilon=eps)
        X = _sample_model_region(profile, count, diam, rng)
        _, _, Hdiag, Hmix, Hnn, _, valid = _jet_arrays(spec, X)
        det, convex = _det_arrays(Hdiag, Hmix, Hnn)
        if not np.all(valid & convex):
            return -math.inf
        return float(np.min(det))

    search_count = min(sample_count, 4000)
    eps = cap
    md = min_det_at(eps, search_count, search_rng)
    if md >= M_rhs:
        lo_pass, hi_fail = eps, None
    else:
        hi_fail = eps
        while True:
            eps *= 0.5
            if eps < floor:
                raise EpsilonSelectionError(
                    f"no scale certifies det D^2 W >= {M_rhs:g} above {floor:g}"
                )
            if min_det_at(eps, search_count, search_rng) >= M_rhs:
                lo_pass = eps
                break
            hi_fail = eps
    if hi_fail is not None:
        while hi_fail / lo_pass > 1.001:
            mid = math.sqrt(hi_fail * lo_pass)
            if min_det_at(mid, search_count, search_rng) >= M_rhs:
                lo_pass = mid
            else:
                hi_fail = mid

    final_rng = np.random.default_rng(ss.spawn(2)[1])
    eps0 = lo_pass
    for _ in range(8):
        md = min_det_at(eps0, sample_count, final_rng)
        if md >= M_rhs:
            spec = PowerBarrierSpec(profile=profile, exponent=lam, epsilon=eps0)
            return DegenerateBarrierReport(
                case=case,
                lam=lam,
                exponent=exponent,
                epsilon=eps0,
                delta=spec.delta(),
                min_det=md,
                m_rhs=M_rhs,
                samples=sample_count,
                passed=True,
            )
        eps0 *= 0.8
        if eps0 < floor:
            break
    raise EpsilonSelectionError("fresh-sample determinant certification failed")


@dataclass(frozen=True)
class EllipsoidSpec:
    """Ellipsoid E with semi-axes A_i = c (h_tilde/eta)^(1/a_i), A_n = c h_tilde,
    centered at (0, ..., 0, 3 h_tilde / 4); sits inside {h_tilde/2 <= x_n <= h_tilde}."""

    profile: AnisotropyProfile
    h_tilde: float
    c: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.c <= 0.25:
            raise OutOfRangeError(f"ellipsoid shape constant c={self.c} outside (0, 1/4]")
        if not self.h_tilde > 0.0:
            raise OutOfRangeError(f"h_tilde={self.h_tilde} must be positive")
        if self.profile.h is not None and not self.h_tilde < self.profile.h / 2.0:
            raise OutOfRangeError(
                f"h_tilde={self.h_tilde} must be below h/2={self.profile.h / 2.0}"
            )

    @property
    def dim(self) -> int:
        return self.profile.dim

    @property
    def eta(self) -> float:
        return max(self.profile.eta)

    @property
    def semi_axes(self) -> np.ndarray:
        a = np.array(self.profile.a)
        trans = self.c * np.where(
            a < A_CAP, (self.h_tilde / self.eta) ** (1.0 / a), 1.0
        )
        return np.concatenate([trans, [self.c * self.h_tilde]])

    @property
    def center(self) -> np.ndarray:
        ctr = np.zeros(self.dim)
        ctr[-1] = 0.75 * self.h_tilde
        return ctr

    def level(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=float))
        return np.sum(((X - self.center) / self.semi_axes) ** 2, axis=1)

    def det_closed_form(self, epsilon: float) -> float:
        """eps^n 2^n c^(-2n) eta^abar h_tilde^(-abar-2)."""
        n = self.dim
        ab = abar(self.profile.a)
        return (
            epsilon**n * 2.0**n / self.c ** (2 * n)
            * self.eta**ab * self.h_tilde ** (-ab - 2.0)
        )

    def v2_margin(self, count: int = 20_000, rng=None) -> float:
        """Worst slack of E inside V2 = {2 eta sum|x_i|^a_i < x_n}, by sampling dE."""
        rng = rng if rng is not None else np.random.default_rng(0)
        u = rng.normal(size=(count, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = self.center + u * self.semi_axes
        prof = AnisotropyProfile(self.profile.a, (self.eta,) * (self.dim - 1), self.profile.h)
        return float(np.min(pts[:, -1] - 2.0 * prof.height(pts[:, :-1])))


def ellipsoid_barrier(spec: EllipsoidSpec, epsilon: float, x):
    """Quadratic barrier -eps(1 - level(x)) on E; returns (value, hessian, det).

    The Hessian is the constant diagonal 2 eps / A_i^2 and the assembled
    determinant matches ``spec.det_closed_form(eps)`` to rounding.
    """
    if not epsilon > 0.0:
        raise OutOfRangeError(f"epsilon={epsilon} must be positive")
    X = np.asarray(x, dtype=float)
    lvl = spec.level(X)[0]
    if lvl > 1.0 + 1e-12:
        raise BarrierDomainError(f"point {x} outside the ellipsoid (level={lvl:.6f})")
    value = -epsilon * (1.0 - lvl)
    hessian = np.diag(2.0 * epsilon / spec.semi_axes**2)
    det = float(np.linalg.det(hessian))
    return value, hessian, det


@dataclass
class Thm15Step1Report:
    """First-step lower bound for the degenerate problem on the ellipsoid."""

    epsilon: float
    c2: float
    lambda0: float
    lipschitz_M: float
    c1: float
    rhs_floor: float  # certified lower bound C * h_tilde^q on det D^2 u over E
    center_bound: float  # = epsilon = |W(center)|


def _lipschitz_bound(profile: AnisotropyProfile, rng=None, count: int = 50_000) -> float:
    """Sampled max of |grad v| over {v < h/2} for v = eta_max * sum |x_i|^a_i."""
    h = profile.require_h()
    eta = max(profile.eta)
    prof = AnisotropyProfile(profile.a, (eta,) * (profile.dim - 1), h)
    rng = rng if rng is not None else np.random.default_rng(0)
    halfw = np.array(
        [
            (0.5 * h / eta) ** (1.0 / a) if a < A_CAP else _cap_halfwidth(eta)
            for a in prof.a
        ]
    )
    xp = rng.uniform(-halfw, halfw, size=(count, prof.dim - 1))
    xp = xp[prof.height(xp) < 0.5 * h]
    if xp.shape[0] == 0:
        raise OutOfRangeError("empty sublevel set {v < h/2}; check profile")
    return float(np.max(np.linalg.norm(prof.height_gradient(xp), axis=1)))


def _cap_halfwidth(eta: float) -> float:
    return 0.5 * eta ** (-1.0 / A_CAP)


def thm15_step1_bound(
    ctx: ExponentContext,
    profile: AnisotropyProfile,
    h_tilde: float,
    K: float,
    diam: float,
    c: float = 0.25,
    seed: int = 0,
) -> Thm15Step1Report:
    """Largest ellipsoid-barrier height with det D^2 W below the equation's floor.

    Uses |u| >= (K/diam) d_x and c1*h_tilde <= d_x <= h_tilde on E to floor
    det D^2 u = |u|^q by C*h_tilde^q, then solves the closed-form determinant
    equality for eps; the result scales exactly as c2 * h_tilde^((q+abar+2)/n)
    and |W(center)| = eps is the induced center bound.
    """
    q = ctx.require_q()
    if not K > 0.0:
        raise OutOfRangeError(f"K={K} must be positive")
    spec = EllipsoidSpec(profile=profile, h_tilde=h_tilde, c=c)
    ab = abar(profile.a)
    n = ctx.n
    lam0 = (q + ab + 2.0) / n
    M = _lipschitz_bound(profile, np.random.default_rng(seed))
    c1 = 1.0 / (2.0 * math.sqrt(1.0 + M * M))
    rhs_floor_coeff = (K / diam) ** q * c1**q  # det D^2 u >= coeff * h_tilde^q on E
    rhs_floor = rhs_floor_coeff * h_tilde**q
    eta = spec.eta
    c2 = (rhs_floor_coeff * c ** (2 * n) * eta ** (-ab) / 2.0**n) ** (1.0 / n)
    eps = c2 * h_tilde**lam0
    return Thm15Step1Report(
        epsilon=eps,
        c2=c2,
        lambda0=lam0,
        lipschitz_M=M,
        c1=c1,
        rhs_floor=rhs_floor,
        center_bound=eps,
    )


def thm13_lower_value(
    ctx: ExponentContext,
    profile: AnisotropyProfile,
    h_tilde: float,
    C1: float | None = None,
    diam: float | None = None,
    c: float = 0.25,
    seed: int = 0,
) -> float:
    """Singular-problem center bound h_tilde^theta * |Wtilde(0)| on the ellipsoid.

    Wtilde solves the rescaled unit-ball problem
    det D^2 Wtilde = C1 c^(2n) eta^(-abar) |Wtilde|^(-n-2k-2), Wtilde|dB1 = 0,
    by the radial shooting oracle.  When C1 is omitted it defaults to the
    explicit drift-absorption constant [9 diam sqrt(1+M^2)]^(-k).
    """
    k = ctx.require_k()
    th = theta(ctx)
    spec = EllipsoidSpec(profile=profile, h_tilde=h_tilde, c=c)
    if C1 is None:
        if diam is None:
            raise OutOfRangeError("need diam to derive the default C1")
        M = _lipschitz_bound(profile, np.random.default_rng(seed))
        C1 = (9.0 * diam * math.sqrt(1.0 + M * M)) ** (-k)
    if not C1 > 0.0:
        raise OutOfRangeError(f"C1={C1} must be positive")
    ab = abar(profile.a)
    coeff = C1 * c ** (2 * ctx.n) * spec.eta ** (-ab)

    from .solver.radial import radial_oracle

    prof = radial_oracle(ctx.n, "rescaled", {"coeff": coeff, "k": k})
    return h_tilde**th * abs(prof.u0)
