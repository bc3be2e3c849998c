"""Fixed-point outer loops for the singular and degenerate problems.

Both problems are reduced to a sequence of prescribed-determinant solves:

* degenerate (det D^2 u = |u|^q): undamped iteration u -> ma_solve(|u|^q)
  initialized from the supersolution-scale constant right side M^q with
  M = c_init |Omega|^(2/(n-q)); starting from above makes |u_m| decrease
  pointwise, and the trivial fixed point u = 0 is detected and rejected;
* singular (det D^2 u = |u|^(-n-k-2) (x.Du - u)^(-k)): damped iteration
  u -> (1-omega) u + omega ma_solve(F(u)) with floors on |u| and on the
  drift x.Du - u that are tied to the expected boundary decay, so they are
  inactive on the converged iterate (asserted in the report).
"""

from __future__ import annotations

import time

import numpy as np

from ..errors import (
    AssumptionViolationError,
    ConvergenceError,
    DegenerateFixedPointError,
    OutOfRangeError,
)
from ..geometry import GridDomain
from .stencil import GridFunction, SolveReport, _stencil_for, ma_solve


def solve_degenerate(
    domain: GridDomain,
    q: float,
    c_init: float = 1.0,
    tol: float = 1e-7,
    inner_tol: float = 1e-8,
    max_outer: int = 200,
    warm_start: GridFunction | None = None,
) -> tuple[GridFunction, SolveReport]:
    """Nontrivial convex solution of det D^2 u = |u|^q, u = 0 on the boundary."""
    n = domain.n
    if not 0.0 <= q < n:
        raise OutOfRangeError(f"q={q} outside [0, n)")
    t0 = time.perf_counter()
    volume = domain.mask.sum() * domain.h_grid**n
    M = c_init * volume ** (2.0 / (n - q))
    if warm_start is not None:
        u, newton_total = warm_start, 0
    else:
        u, rep = ma_solve(domain, M**q, tol=inner_tol)
        newton_total = rep.iterations[0]
    history = []
    monotone = True
    prev_diff = np.inf
    for it in range(max_outer):
        rhs = np.abs(u.interior_values) ** q
        tol_eff = float(np.clip(0.03 * prev_diff, inner_tol, 1e-5))
        u_next, rep = ma_solve(
            domain, rhs, tol=tol_eff, warm_start=u, max_newton=8, strict=False
        )
        newton_total += rep.iterations[0]
        diff = float(np.max(np.abs(u_next.interior_values - u.interior_values)))
        history.append(diff)
        if it >= 1 and diff > prev_diff * (1.0 + 1e-9):
            monotone = False
        prev_diff = diff
        u = u_next
        sup = float(np.max(np.abs(u.interior_values)))
        if sup < 10.0 * domain.h_grid**2:
            raise DegenerateFixedPointError(
                f"iteration collapsed to the zero solution (sup {sup:.2e}); "
                f"increase the initial scale c_init={c_init}"
            )
        if diff < tol:
            # verify with one strict full-tolerance solve
            u_fin, rep = ma_solve(
                domain, np.abs(u.interior_values) ** q, tol=inner_tol, warm_start=u
            )
            newton_total += rep.iterations[0]
            diff = float(np.max(np.abs(u_fin.interior_values - u.interior_values)))
            u = u_fin
            if diff >= tol:
                prev_diff = diff
                continue
            return u, SolveReport(
                iterations=(it + 1, newton_total),
                residual=diff,
                monotone_history=monotone,
                wall_time=time.perf_counter() - t0,
                history=history,
                extra={"q": q, "init_scale": M},
            )
    raise ConvergenceError(
        f"degenerate fixed point not reached in {max_outer} outer iterations",
        history=history,
    )


def _gradient(op, u):
    """Cut-cell centered first differences along the coordinate axes."""
    upad = np.append(u, 0.0)
    naxis = op.domain.n
    grad = np.empty((u.shape[0], naxis))
    for j in range(naxis):
        up = upad[np.where(op.nb_plus[:, j] >= 0, op.nb_plus[:, j], u.shape[0])]
        um = upad[np.where(op.nb_minus[:, j] >= 0, op.nb_minus[:, j], u.shape[0])]
        grad[:, j] = (up - um) / (op.arm_plus[:, j] + op.arm_minus[:, j])
    return grad


def solve_singular(
    domain: GridDomain,
    k: float,
    omega: float = 0.3,
    tol: float = 1e-6,
    inner_tol: float = 1e-8,
    max_outer: int = 400,
    theta_pred: float | None = None,
    warm_start: GridFunction | None = None,
) -> tuple[GridFunction, SolveReport]:
    """Convex solution of det D^2 u = |u|^(-n-k-2) (x.Du - u)^(-k), u = 0 on bdry.

    The domain must contain the origin strictly (the drift positivity
    x.Du - u > 0 is asserted at every interior node at convergence).
    """
    n = domain.n
    if not k > 0:
        raise OutOfRangeError(f"k={k} must be positive")
    if domain.d0 is None:
        raise AssumptionViolationError("singular problem needs the origin strictly interior")
    t0 = time.perf_counter()
    op = _stencil_for(domain)
    pts = op.pts
    power = n + k + 2.0
    if theta_pred is None:
        theta_pred = (n + k + 1.0) / (2.0 * n + 2.0 * k + 2.0)  # interior-sphere value

    r_in = float(np.max(domain.dx))
    d_min = float(np.min(domain.dx[domain.mask]))
    newton_total = 0
    if warm_start is not None:
        u = warm_start
        u_scale = float(np.max(np.abs(u.interior_values)))
    else:
        u_const, rep = ma_solve(domain, 1.0, tol=inner_tol)
        newton_total += rep.iterations[0]
        u_scale = float(np.max(np.abs(u_const.interior_values)))
        # start from the predicted boundary decay -c d^theta: the constant-rhs
        # solve has |u| ~ d near the boundary, whose |u|^(-n-k-2) transient is
        # orders of magnitude above the equation's own scale
        u = GridFunction.from_interior(
            domain, -u_scale * (domain.dx[domain.mask] / r_in) ** theta_pred
        )
    floor = 0.1 * u_scale * (d_min / r_in) ** theta_pred

    def rhs_of(uvals):
        grad = _gradient(op, uvals)
        drift = np.sum(pts * grad, axis=1) - uvals
        mag = np.maximum(np.abs(uvals), floor)
        dr = np.maximum(drift, floor)
        clamped = bool(np.any(np.abs(uvals) < floor) or np.any(drift < floor))
        return mag ** (-power) * dr ** (-k), drift, clamped

    history = []
    monotone = True
    prev_diff = np.inf
    for it in range(max_outer):
        uv = u.interior_values
        rhs, drift, _ = rhs_of(uv)
        # loose inner solves while the outer loop is far from its fixed point
        tol_eff = float(np.clip(0.03 * prev_diff, inner_tol, 1e-4))
        u_star, rep = ma_solve(
            domain, rhs, tol=tol_eff, warm_start=u, max_newton=8, strict=False
        )
        newton_total += rep.iterations[0]
        diff = float(np.max(np.abs(u_star.interior_values - uv)))
        history.append(diff)
        if it >= 1 and diff > prev_diff * (1.0 + 1e-9):
            monotone = False
        prev_diff = diff
        u = GridFunction.from_interior(
            domain, (1.0 - omega) * uv + omega * u_star.interior_values
        )
        if diff < tol:
            uv = u.interior_values
            rhs, drift, clamped = rhs_of(uv)
            u_fin, rep = ma_solve(domain, rhs, tol=inner_tol, warm_start=u)
            newton_total += rep.iterations[0]
            if float(np.max(np.abs(u_fin.interior_values - uv))) >= tol:
                prev_diff = diff
                continue
            if np.any(drift <= 0.0):
                bad = int(np.argmin(drift))
                raise AssumptionViolationError(
                    f"x.Du - u = {drift[bad]:.3e} <= 0 at node {pts[bad]} at convergence"
                )
            pde_res = op.residual_norm(uv, rhs)
            return u, SolveReport(
                iterations=(it + 1, newton_total),
                residual=diff,
                monotone_history=monotone,
                wall_time=time.perf_counter() - t0,
                history=history,
                extra={
                    "k": k,
                    "pde_residual": pde_res,
                    "clamp_inactive": not clamped,
                    "floor": floor,
                    "min_drift": float(np.min(drift)),
                },
            )
    raise ConvergenceError(
        f"singular fixed point not reached in {max_outer} outer iterations",
        history=history,
    )


def solve_with_continuation(
    kind,
    problem: str,
    h_grid: float,
    levels: int = 2,
    make=None,
    **kwargs,
) -> tuple[GridFunction, SolveReport, GridDomain]:
    """Solve on a grid hierarchy, prolonging each level's solution as the
    next warm start; the fixed point is that of the finest grid alone.

    ``problem`` is 'degenerate' (kwargs: q, ...) or 'singular' (kwargs: k,
    ...).  ``levels`` coarse grids of spacing 2h, 4h, ... precede the target.
    """
    from ..geometry import make_domain

    make = make or make_domain
    spacings = [h_grid * 2**lev for lev in range(levels, 0, -1)]
    spacings.append(h_grid)
    if problem == "degenerate":
        solver = solve_degenerate
        decay = 1.0  # |u| ~ d at the boundary (linear lower bound)
    else:
        solver = solve_singular
        n = kind.dim
        k = kwargs.get("k", 1.0)
        decay = kwargs.get("theta_pred") or (n + k + 1.0) / (2.0 * n + 2.0 * k + 2.0)
    prev = None  # (GridFunction u, GridFunction dx^decay)
    total_wall = 0.0
    report = None
    domain = None
    for h in spacings:
        try:
            domain = make(kind, h)
        except Exception:
            continue  # level too coarse for this domain; skip it
        warm = None
        if prev is not None:
            # prolong the smooth ratio u / d^decay: interpolating u and
            # d^decay separately cancels the zero-extension bias of plain
            # interpolation inside the boundary layer
            u_c, dth_c = prev
            pts = domain.interior_points()
            ui = u_c.interpolate(pts)
            di = dth_c.interpolate(pts)
            dth_f = domain.dx[domain.mask] ** decay
            ratio = np.divide(ui, di, out=np.zeros_like(ui), where=di > 1e-300)
            warm = GridFunction.from_interior(domain, ratio * dth_f)
        fn, report = solver(domain, warm_start=warm, **kwargs)
        total_wall += report.wall_time
        prev = (fn, GridFunction.from_interior(domain, domain.dx[domain.mask] ** decay))
    if report is None:
        raise OutOfRangeError("no grid level could be built")
    report.wall_time = total_wall
    return prev[0], report, domain
