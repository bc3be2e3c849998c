"""Radial shooting oracles for det D^2 u = f on the unit ball.

For radial convex u the operator reduces to u'' (u'/r)^(n-1); the boundary
value problem u'(0) = 0, u(1) = 0 is solved by shooting on the center value
with bisection.  Problems with bounded right side shoot directly on u(1).

Problems whose right side blows up as u -> 0 (the singular family) have
profiles u ~ -C (1-r)^sigma with sigma < 1, so the gradient blows up at the
zero crossing and no double-precision trajectory can place u(1) below
roughly C * (machine eps)^sigma.  The bisection therefore compares the
crossing radius (terminal event just below zero, falling back to the
integrator's stall radius, which sits within machine precision of the true
crossing) against 1, and the reported residual is |u| at the last
representable radius <= 1.  Center values are accurate to the bracket
tolerance; only the boundary residual carries the eps^sigma floor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import OutOfRangeError, ShootingBracketError

_PROBLEMS = ("constant", "degenerate", "singular", "rescaled")


@dataclass
class RadialProfile:
    """Dense radial solution u(r) on [0, 1] with its shooting metadata."""

    n: int
    problem: str
    params: dict
    u0: float  # center value u(0) < 0
    residual: float  # |u| at residual_radius
    residual_radius: float  # last representable radius <= 1 that was reached
    r_start: float
    r_end: float
    beta: float  # initial curvature: u ~ u0 + beta r^2 / 2
    bracket_width: float  # relative width of the final shooting bracket
    _sol: object = field(repr=False, default=None)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty(r.shape)
        near = r < self.r_start
        out[near] = self.u0 + 0.5 * self.beta * r[near] ** 2
        mid = (~near) & (r <= self.r_end)
        if np.any(mid):
            out[mid] = self._sol(r[mid])[0]
        far = r > self.r_end
        if np.any(far):
            # beyond the last computed radius the profile is within the
            # residual of zero; interpolate linearly to u(1) = 0
            u_end = float(self._sol(self.r_end)[0])
            span = max(1.0 - self.r_end, 1e-300)
            out[far] = u_end * np.clip((1.0 - r[far]) / span, 0.0, 1.0)
        return out if out.shape else float(out)


def _make_rhs(n, problem, params):
    if problem == "constant":
        f0 = float(params["f0"])
        if f0 < 0:
            raise OutOfRangeError("constant right side must be nonnegative")

        def rhs(r, y):
            u, w = y
            return [w, f0 * (r / w) ** (n - 1)]

        return rhs
    if problem == "degenerate":
        q = float(params["q"])
        if not 0.0 <= q < n:
            raise OutOfRangeError(f"q={q} outside [0, n)")

        def rhs(r, y):
            u, w = y
            return [w, abs(u) ** q * (r / w) ** (n - 1)]

        return rhs
    if problem == "singular":
        k = float(params["k"])
        if not k > 0:
            raise OutOfRangeError(f"k={k} must be positive")
        p = n + k + 2.0

        def rhs(r, y):
            u, w = y
            drift = r * w - u
            return [w, abs(u) ** (-p) * drift ** (-k) * (r / w) ** (n - 1)]

        return rhs
    if problem == "rescaled":
        k = float(params["k"])
        coeff = float(params["coeff"])
        if not (k > 0 and coeff > 0):
            raise OutOfRangeError("rescaled problem needs k > 0 and coeff > 0")
        p = n + 2.0 * k + 2.0

        def rhs(r, y):
            u, w = y
            return [w, coeff * abs(u) ** (-p) * (r / w) ** (n - 1)]

        return rhs
    raise OutOfRangeError(f"unknown radial problem {problem!r}; pick from {_PROBLEMS}")


def _beta0(n, problem, params, m):
    """Initial curvature from the local balance beta^n = f(center)."""
    if problem == "constant":
        return float(params["f0"]) ** (1.0 / n)
    if problem == "degenerate":
        return m ** (float(params["q"]) / n)
    if problem == "singular":
        k = float(params["k"])
        return m ** (-(n + 2.0 * k + 2.0) / n)
    k = float(params["k"])
    return float(params["coeff"]) ** (1.0 / n) * m ** (-(n + 2.0 * k + 2.0) / n)


def _integrate(n, problem, params, m, rtol, u_event=None, r_max=1.0, dense=False):
    rhs = _make_rhs(n, problem, params)
    r0 = 1e-6
    beta = _beta0(n, problem, params, m)
    y0 = [-m + 0.5 * beta * r0**2, beta * r0]
    events = None
    if u_event is not None:

        def crossing(r, y):
            return y[0] + u_event

        crossing.terminal = True
        crossing.direction = 1.0
        events = crossing
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # step-underflow stall near the zero crossing
        sol = solve_ivp(
            rhs,
            (r0, r_max),
            y0,
            method="RK45",
            rtol=rtol,
            atol=1e-14 * max(1.0, m),
            events=events,
            dense_output=dense,
        )
    return sol, r0, beta


def _crossing_radius(sol, scale):
    """Radius where the trajectory reached (or stalled at) the zero level."""
    if sol.t_events is not None and sol.t_events[0].size:
        return float(sol.t_events[0][0])
    if sol.status == -1 and abs(sol.y[0, -1]) < 1e-3 * scale:
        return float(sol.t[-1])  # integrator stall pins the singular crossing
    return np.inf


def radial_oracle(
    n: int,
    problem: str,
    params: dict,
    rtol: float = 1e-10,
    bracket_tol: float = 1e-13,
    max_expand: int = 200,
) -> RadialProfile:
    """Shoot on u(0) until u(1) = 0; returns the dense radial profile.

    ``problem`` is one of 'constant' {f0}, 'degenerate' {q}, 'singular' {k}
    or 'rescaled' {coeff, k} (the unit-ball problem
    det D^2 u = coeff |u|^(-n-2k-2) arising from the ellipsoid rescaling).
    """
    if n < 2:
        raise OutOfRangeError("radial reduction needs n >= 2")
    if problem == "constant" and float(params["f0"]) == 0.0:
        raise OutOfRangeError("zero right side has the trivial solution; nothing to shoot")

    singular_kind = problem in ("singular", "rescaled")

    if singular_kind:

        def too_shallow(m):
            u_ev = 1e-7 * max(1.0, m)
            sol, _, _ = _integrate(n, problem, params, m, rtol, u_event=u_ev, r_max=2.0)
            return _crossing_radius(sol, max(1.0, m)) < 1.0

        m = 1.0
        lo = hi = None
        for _ in range(max_expand):
            if too_shallow(m):
                lo = m
                if hi is not None:
                    break
                m *= 2.0
            else:
                hi = m
                if lo is not None:
                    break
                m *= 0.5
        if lo is None or hi is None:
            raise ShootingBracketError(f"could not bracket center depth for {problem}")
        lo, hi = min(lo, hi), max(lo, hi)
        while (hi - lo) / hi > bracket_tol:
            mid = 0.5 * (lo + hi)
            if too_shallow(mid):
                lo = mid
            else:
                hi = mid
        m_final = hi  # deep side: the crossing radius is >= 1
        u_ev = 1e-7 * max(1.0, m_final)
        sol, r0, beta = _integrate(
            n, problem, params, m_final, rtol, u_event=u_ev, r_max=2.0, dense=True
        )
        r_reach = min(float(sol.sol.t_max), 1.0)
        u1 = float(sol.sol(r_reach)[0])
        return RadialProfile(
            n=n,
            problem=problem,
            params=dict(params),
            u0=-m_final,
            residual=abs(u1),
            residual_radius=r_reach,
            r_start=r0,
            r_end=r_reach,
            beta=beta,
            bracket_width=(hi - lo) / hi,
            _sol=sol.sol,
        )

    # bounded right side: shoot directly on u(1)
    def endpoint(m):
        sol, _, _ = _integrate(n, problem, params, m, rtol)
        return float(sol.y[0, -1])

    m = 1.0
    lo = hi = None  # lo: endpoint > 0 (shallow), hi: endpoint < 0 (deep)
    for _ in range(max_expand):
        g = endpoint(m)
        if g > 0.0:
            lo = m
            if hi is not None:
                break
            m *= 2.0
        else:
            hi = m
            if lo is not None:
                break
            m *= 0.5
    if lo is None or hi is None:
        raise ShootingBracketError(f"could not bracket center depth for {problem}")
    a, b = min(lo, hi), max(lo, hi)
    while (b - a) / b > bracket_tol:
        mid = 0.5 * (a + b)
        if endpoint(mid) > 0.0:
            a = mid
        else:
            b = mid
    m_final = 0.5 * (a + b)
    sol, r0, beta = _integrate(n, problem, params, m_final, rtol, dense=True)
    return RadialProfile(
        n=n,
        problem=problem,
        params=dict(params),
        u0=-m_final,
        residual=abs(float(sol.y[0, -1])),
        residual_radius=1.0,
        r_start=r0,
        r_end=float(sol.t[-1]),
        beta=beta,
        bracket_width=(b - a) / b,
        _sol=sol.sol,
    )
