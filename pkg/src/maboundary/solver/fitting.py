"""Boundary-decay exponent estimation by log-log regression along normal rays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import OutOfRangeError, WindowTooDeepError
from ..geometry import Domain, normal_ray_samples
from .radial import RadialProfile
from .stencil import GridFunction

_NOISE_FLOOR = 100.0 * np.finfo(float).eps


@dataclass
class ExponentFit:
    """Fitted decay exponent of |u| ~ C d^lambda over a depth window."""

    lambda_hat: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    predicted: float | None
    abs_gap: float | None
    depths: np.ndarray
    values: np.ndarray


def fit_loglog(depths, values, window=None, predicted=None) -> ExponentFit:
    """Least-squares slope of log|u| against log d."""
    depths = np.asarray(depths, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values < _NOISE_FLOOR):
        raise WindowTooDeepError(
            f"samples reach the noise floor (min |u| = {values.min():.3e}); "
            "shrink the window toward the boundary layer's resolvable part"
        )
    x = np.log(depths)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    win = window if window is not None else (float(depths.min()), float(depths.max()))
    return ExponentFit(
        lambda_hat=float(slope),
        intercept=float(intercept),
        r_squared=float(min(r2, 1.0)),
        window=win,
        predicted=predicted,
        abs_gap=None if predicted is None else abs(float(slope) - predicted),
        depths=depths,
        values=values,
    )


def fit_boundary_exponent(
    u,
    kind: Domain | None = None,
    x0=None,
    window: tuple[float, float] = (1e-3, 1e-1),
    depths: int = 12,
    predicted: float | None = None,
) -> ExponentFit:
    """Fit the boundary-decay exponent of ``u`` along the inward normal at x0.

    ``u`` may be a GridFunction (sampled by multilinear interpolation at
    geometric depths along the normal ray), a RadialProfile (depth d = 1 - r)
    or a callable d -> u(d).  At least 8 geometrically spaced depths are used.
    """
    d_min, d_max = window
    if not 0.0 < d_min < d_max:
        raise OutOfRangeError(f"bad window {window}")
    if depths < 8:
        raise OutOfRangeError("need at least 8 sample depths")
    ds = np.geomspace(d_min, d_max, depths)

    if isinstance(u, GridFunction):
        dom_kind = kind if kind is not None else u.domain.kind
        if x0 is None:
            raise OutOfRangeError("grid-function fits need the boundary point x0")
        pts = normal_ray_samples(dom_kind, x0, ds)
        vals = u.interpolate(pts)
    elif isinstance(u, RadialProfile):
        vals = u.value(1.0 - ds)
    elif callable(u):
        vals = np.asarray([u(d) for d in ds], dtype=float)
    else:
        raise OutOfRangeError(f"cannot fit object of type {type(u)!r}")
    return fit_loglog(ds, vals, window=window, predicted=predicted)
