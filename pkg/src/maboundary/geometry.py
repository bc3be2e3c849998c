"""Bounded convex domains, anisotropic convexity data and boundary queries.

Every domain kind carries an exact membership predicate.  Boundary
distances are exact for balls and boxes and are computed by bracketed
scans plus golden-section refinement (absolute tolerance ~1e-10) for
model regions and superellipses.  Convexity checks are sampling-based
certificates: they test the defining set inclusions on a dense random
sample and report the worst margin, so a failure is always diagnosable.
A finite sample can refute but never prove the universal inclusion; the
reports record the sample count for that reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .errors import GeometryDomainError, InvalidProfileError, OutOfRangeError, RayExitError
from .exponents import A_CAP

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AnisotropyProfile:
    """Convexity data (a_i, eta_i, h): model hypersurface x_n = sum eta_i |x_i|^a_i.

    ``h`` is the interior-model height and may be omitted for exterior-only
    profiles.  Exponents at or above A_CAP encode the flat limit; their
    terms contribute 0 (the bounded-domain reading of the a_i -> inf limit).
    """

    a: tuple[float, ...]
    eta: tuple[float, ...]
    h: float | None = None

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        eta = tuple(float(v) for v in self.eta)
        if len(a) == 0 or len(a) != len(eta):
            raise InvalidProfileError("a and eta must be equal-length, non-empty")
        if any(v < 1.0 for v in a):
            raise InvalidProfileError(f"anisotropy exponents must be >= 1, got {a}")
        if any(v <= 0.0 for v in eta):
            raise InvalidProfileError(f"eta entries must be positive, got {eta}")
        if self.h is not None and not self.h > 0:
            raise InvalidProfileError(f"model height h={self.h} must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "eta", eta)

    @property
    def dim(self) -> int:
        return len(self.a) + 1

    def require_h(self) -> float:
        if self.h is None:
            raise InvalidProfileError("profile has no interior-model height h")
        return self.h

    def height(self, xp: np.ndarray) -> np.ndarray:
        """Model hypersurface height sum eta_i |x_i|^a_i for x' rows ``xp``."""
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        out = np.zeros(xp.shape[0])
        for i, (ai, ei) in enumerate(zip(self.a, self.eta)):
            if ai >= A_CAP:
                continue  # flat direction contributes nothing
            out += ei * np.abs(xp[:, i]) ** ai
        return out

    def height_gradient(self, xp: np.ndarray) -> np.ndarray:
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        g = np.zeros_like(xp)
        for i, (ai, ei) in enumerate(zip(self.a, self.eta)):
            if ai >= A_CAP:
                continue
            g[:, i] = ei * ai * np.abs(xp[:, i]) ** (ai - 1.0) * np.sign(xp[:, i])
        return g


def _as_points(x, dim) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise GeometryDomainError(f"expected points of dimension {dim}, got {pts.shape[1]}")
    return pts, single


def _golden_scan_min(f, lo, hi, scan=65, iters=72):
    """Vectorized global scan + golden-section refinement of f on [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    ts = np.linspace(0.0, 1.0, scan)
    grid = lo[:, None] + (hi - lo)[:, None] * ts[None, :]
    vals = f(grid)
    j = np.argmin(vals, axis=1)
    idx = np.arange(lo.shape[0])
    a = grid[idx, np.clip(j - 1, 0, scan - 1)]
    b = grid[idx, np.clip(j + 1, 0, scan - 1)]
    for _ in range(iters):
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        pick = f(np.stack([c, d], axis=1))
        keep_left = pick[:, 0] < pick[:, 1]
        b = np.where(keep_left, d, b)
        a = np.where(keep_left, a, c)
    m = 0.5 * (a + b)
    return m, f(m[:, None])[:, 0]


class Domain:
    """Base class for exact-membership convex domain kinds."""

    dim: int

    def contains(self, x):
        pts, single = _as_points(x, self.dim)
        out = self.membership_margin(pts) > 0.0
        return bool(out[0]) if single else out

    def membership_margin(self, x) -> np.ndarray:
        """Signed slack of the defining inequalities: > 0 inside, < 0 outside.

        Not a metric distance; used for diagnosable inclusion reports.
        """
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def grid_distance(self, pts: np.ndarray) -> np.ndarray:
        """Boundary distance for many interior points (vectorized)."""
        raise NotImplementedError

    def dist_to_boundary(self, x) -> float:
        """Boundary distance for one point of the closure (tolerance ~1e-10)."""
        pts, _ = _as_points(x, self.dim)
        if self.membership_margin(pts)[0] < -1e-9 * max(1.0, self.diameter()):
            raise GeometryDomainError(f"point {x} outside the domain closure")
        return float(max(self.grid_distance(pts)[0], 0.0))

    def inward_normal(self, x0) -> np.ndarray:
        raise NotImplementedError

    def default_boundary_point(self) -> np.ndarray:
        """Canonical boundary point for decay fits (bottom of the domain)."""
        raise NotImplementedError

    def sample_interior(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform rejection sample of interior points."""
        lo, hi = self.bounding_box()
        out = np.empty((0, self.dim))
        tries = 0
        while out.shape[0] < count:
            m = max(count, 4 * (count - out.shape[0]))
            cand = rng.uniform(lo, hi, size=(m, self.dim))
            cand = cand[self.membership_margin(cand) > 0.0]
            out = np.vstack([out, cand])
            tries += 1
            if tries > 200:
                raise GeometryDomainError("interior sampling failed; degenerate domain?")
        return out[:count]


class Ball(Domain):
    def __init__(self, radius: float, center=None, dim: int = 2):
        if not radius > 0:
            raise OutOfRangeError(f"ball radius {radius} must be positive")
        self.radius = float(radius)
        self.center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        self.dim = self.center.shape[0]

    def membership_margin(self, x):
        pts, _ = _as_points(x, self.dim)
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def diameter(self):
        return 2.0 * self.radius

    def grid_distance(self, pts):
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def inward_normal(self, x0):
        x0 = np.asarray(x0, dtype=float)
        v = self.center - x0
        nv = np.linalg.norm(v)
        if nv < 1e-14:
            raise GeometryDomainError("center is not a boundary point")
        return v / nv

    def default_boundary_point(self):
        p = self.center.copy()
        p[-1] -= self.radius
        return p


class Box(Domain):
    def __init__(self, lows, highs):
        self.lows = np.asarray(lows, dtype=float)
        self.highs = np.asarray(highs, dtype=float)
        if self.lows.shape != self.highs.shape or self.lows.ndim != 1:
            raise OutOfRangeError("box bounds must be equal-length vectors")
        if np.any(self.highs - self.lows <= 0.0):
            raise GeometryDomainError(f"degenerate box: lows={lows}, highs={highs}")
        self.dim = self.lows.shape[0]

    def membership_margin(self, x):
        pts, _ = _as_points(x, self.dim)
        return np.minimum((pts - self.lows).min(axis=1), (self.highs - pts).min(axis=1))

    def bounding_box(self):
        return self.lows.copy(), self.highs.copy()

    def diameter(self):
        return float(np.linalg.norm(self.highs - self.lows))

    def grid_distance(self, pts):
        return self.membership_margin(pts)

    def inward_normal(self, x0):
        x0 = np.asarray(x0, dtype=float)
        gaps = np.concatenate([x0 - self.lows, self.highs - x0])
        active = np.flatnonzero(np.abs(gaps) < 1e-12 * max(1.0, self.diameter()))
        if active.size != 1:
            raise GeometryDomainError(
                "box normal undefined at corners; pick a face-interior point"
            )
        j = active[0]
        n = np.zeros(self.dim)
        if j < self.dim:
            n[j] = 1.0
        else:
            n[j - self.dim] = -1.0
        return n

    def default_boundary_point(self):
        p = 0.5 * (self.lows + self.highs)
        p[-1] = self.lows[-1]
        return p


class ModelRegion(Domain):
    """Interior-model domain {sum eta_i |x_i|^a_i < x_n < h}, capped by a lid."""

    def __init__(self, profile: AnisotropyProfile):
        self.profile = profile
        self.h = profile.require_h()
        self.dim = profile.dim
        self._halfwidths = np.array(
            [
                (self.h / e) ** (1.0 / a) if a < A_CAP else _flat_halfwidth(e)
                for a, e in zip(profile.a, profile.eta)
            ]
        )
        self._kd = None

    def membership_margin(self, x):
        pts, _ = _as_points(x, self.dim)
        v = self.profile.height(pts[:, :-1])
        return np.minimum(pts[:, -1] - v, self.h - pts[:, -1])

    def bounding_box(self):
        lo = np.concatenate([-self._halfwidths, [0.0]])
        hi = np.concatenate([self._halfwidths, [self.h]])
        return lo, hi

    def diameter(self):
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))  # bbox diagonal, upper bound

    def _graph_distance_2d(self, pts):
        x1, xn = pts[:, 0], pts[:, 1]
        dub = xn - self.profile.height(pts[:, :1])  # vertical gap bounds the distance
        dub = np.maximum(dub, 1e-15)

        def f(ts):
            v = self.profile.height(ts.reshape(-1, 1)).reshape(ts.shape)
            return (ts - x1[:, None]) ** 2 + (v - xn[:, None]) ** 2

        _, fmin = _golden_scan_min(f, x1 - dub, x1 + dub)
        return np.sqrt(np.maximum(fmin, 0.0))

    def _graph_samples(self, per_axis=256):
        hw = self._halfwidths
        axes = [np.linspace(-w, w, per_axis) for w in hw]
        mesh = np.meshgrid(*axes, indexing="ij")
        xp = np.stack([m.ravel() for m in mesh], axis=1)
        v = self.profile.height(xp)
        keep = v <= self.h
        return np.column_stack([xp[keep], v[keep]])

    def grid_distance(self, pts):
        lid = self.h - pts[:, -1]
        if self.dim == 2:
            graph = self._graph_distance_2d(pts)
        else:
            if self._kd is None:
                self._kd = cKDTree(self._graph_samples())
            graph, _ = self._kd.query(pts)
        return np.minimum(graph, lid)

    def dist_to_boundary(self, x):
        pts, _ = _as_points(x, self.dim)
        if self.membership_margin(pts)[0] < -1e-9 * max(1.0, self.diameter()):
            raise GeometryDomainError(f"point {x} outside the domain closure")
        if self.dim == 2:
            return float(max(self.grid_distance(pts)[0], 0.0))
        # 3-D: KD seed plus local refinement over x'
        if self._kd is None:
            self._kd = cKDTree(self._graph_samples())
        _, j = self._kd.query(pts[0])
        seed = self._kd.data[j][:-1]
        p = pts[0]

        def obj(xp):
            v = self.profile.height(xp.reshape(1, -1))[0]
            return float(np.sum((xp - p[:-1]) ** 2) + (v - p[-1]) ** 2)

        res = minimize(obj, seed, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 4000})
        graph = math.sqrt(max(res.fun, 0.0))
        return float(max(min(graph, self.h - p[-1]), 0.0))

    def inward_normal(self, x0):
        x0 = np.asarray(x0, dtype=float)
        v = self.profile.height(x0[None, :-1])[0]
        scale = max(1.0, self.diameter())
        on_lid = abs(self.h - x0[-1]) < 1e-10 * scale
        on_graph = abs(x0[-1] - v) < 1e-10 * scale
        if on_lid and not on_graph:
            n = np.zeros(self.dim)
            n[-1] = -1.0
            return n
        if not on_graph:
            raise GeometryDomainError(f"{x0} is not a boundary point of the model region")
        if np.all(np.abs(x0[:-1]) < 1e-14):
            n = np.zeros(self.dim)
            n[-1] = 1.0  # model axis at the vertex
            return n
        g = self.profile.height_gradient(x0[None, :-1])[0]
        n = np.concatenate([-g, [1.0]])
        return n / np.linalg.norm(n)

    def default_boundary_point(self):
        return np.zeros(self.dim)


def _flat_halfwidth(eta: float) -> float:
    # flat-limit transverse extent: the unit-scale box |x_i| < (1/2) eta^(-1/a)
    # of the a -> inf remark, with the capped exponent substituted.
    return 0.5 * eta ** (-1.0 / A_CAP)


class Superellipse(Domain):
    """Level-set domain {sum |x_i/r_i|^p_i < 1} (origin-centered)."""

    def __init__(self, semi_axes, powers):
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        self.powers = np.asarray(powers, dtype=float)
        if self.semi_axes.shape != self.powers.shape or self.semi_axes.ndim != 1:
            raise OutOfRangeError("semi_axes and powers must be equal-length vectors")
        if np.any(self.semi_axes <= 0) or np.any(self.powers < 1):
            raise OutOfRangeError("need semi_axes > 0 and powers >= 1")
        self.dim = self.semi_axes.shape[0]
        self._boundary_cache = None

    def _level(self, pts):
        return np.sum(np.abs(pts / self.semi_axes) ** self.powers, axis=1)

    def membership_margin(self, x):
        pts, _ = _as_points(x, self.dim)
        return 1.0 - self._level(pts)

    def bounding_box(self):
        return -self.semi_axes.copy(), self.semi_axes.copy()

    def _radial_boundary(self, dirs):
        """Boundary intersection t*dir of unit rays, by monotone bisection."""
        scale = np.max(np.abs(dirs) / self.semi_axes, axis=1)
        hi = 1.0 / np.maximum(scale, 1e-300)
        lo = np.zeros_like(hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            inside = self._level(mid[:, None] * dirs) < 1.0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        t = 0.5 * (lo + hi)
        return t[:, None] * dirs

    def _boundary_polyline(self, k=8192):
        if self._boundary_cache is None or self._boundary_cache[0] != k:
            if self.dim == 2:
                phi = np.linspace(0.0, 2.0 * np.pi, k, endpoint=False)
                dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
            else:
                m = int(math.sqrt(k))
                th = np.linspace(0.0, np.pi, m)
                ph = np.linspace(0.0, 2.0 * np.pi, 2 * m, endpoint=False)
                T, P = np.meshgrid(th, ph, indexing="ij")
                dirs = np.stack(
                    [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1
                ).reshape(-1, 3)
            pts = self._radial_boundary(dirs)
            self._boundary_cache = (k, pts, cKDTree(pts))
        return self._boundary_cache[1], self._boundary_cache[2]

    def diameter(self):
        pts, _ = self._boundary_polyline()
        return float(2.0 * np.max(np.linalg.norm(pts, axis=1)))  # symmetric body

    def grid_distance(self, pts):
        _, kd = self._boundary_polyline()
        d, _ = kd.query(pts)
        return d

    def dist_to_boundary(self, x):
        pts, _ = _as_points(x, self.dim)
        if self.membership_margin(pts)[0] < -1e-9:
            raise GeometryDomainError(f"point {x} outside the domain closure")
        bpts, kd = self._boundary_polyline()
        _, j = kd.query(pts[0])
        p = pts[0]
        if self.dim == 2:
            phi0 = math.atan2(bpts[j, 1], bpts[j, 0])
            width = 4.0 * np.pi / bpts.shape[0]

            def f(phis):
                flat = phis.ravel()
                dirs = np.stack([np.cos(flat), np.sin(flat)], axis=1)
                b = self._radial_boundary(dirs)
                return np.sum((b - p) ** 2, axis=1).reshape(phis.shape)

            _, fmin = _golden_scan_min(
                f, np.array([phi0 - width]), np.array([phi0 + width]), scan=17
            )
            return float(math.sqrt(max(fmin[0], 0.0)))
        seed = bpts[j]
        th0 = math.acos(np.clip(seed[2] / np.linalg.norm(seed), -1, 1))
        ph0 = math.atan2(seed[1], seed[0])

        def obj(ang):
            d = np.array(
                [
                    math.sin(ang[0]) * math.cos(ang[1]),
                    math.sin(ang[0]) * math.sin(ang[1]),
                    math.cos(ang[0]),
                ]
            )
            b = self._radial_boundary(d[None, :])[0]
            return float(np.sum((b - p) ** 2))

        res = minimize(obj, np.array([th0, ph0]), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 4000})
        return float(math.sqrt(max(res.fun, 0.0)))

    def inward_normal(self, x0):
        x0 = np.asarray(x0, dtype=float)
        g = (self.powers / self.semi_axes) * np.abs(
            x0 / self.semi_axes
        ) ** (self.powers - 1.0) * np.sign(x0)
        ng = np.linalg.norm(g)
        if ng < 1e-14:
            raise GeometryDomainError("normal undefined at the center")
        return -g / ng

    def default_boundary_point(self):
        p = np.zeros(self.dim)
        p[-1] = -self.semi_axes[-1]
        return p


def rotation_to_axis(normal: np.ndarray) -> np.ndarray:
    """Orthogonal map Q with Q @ normal = e_n (Householder reflection)."""
    normal = np.asarray(normal, dtype=float)
    n = normal / np.linalg.norm(normal)
    en = np.zeros_like(n)
    en[-1] = 1.0
    v = n - en
    nv2 = float(v @ v)
    if nv2 < 1e-30:
        return np.eye(n.shape[0])
    return np.eye(n.shape[0]) - 2.0 * np.outer(v, v) / nv2


@dataclass
class GridDomain:
    """Uniform-grid discretization of a domain kind with boundary distances."""

    kind: Domain
    n: int
    h_grid: float
    lows: np.ndarray
    shape: tuple[int, ...]
    mask: np.ndarray
    dx: np.ndarray
    diam: float
    d0: float | None

    def axes(self):
        return [self.lows[i] + self.h_grid * np.arange(self.shape[i]) for i in range(self.n)]

    def node_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def interior_points(self) -> np.ndarray:
        return self.node_points()[self.mask.ravel()]

    @property
    def interior_count(self) -> int:
        return int(self.mask.sum())

    def index_of_point(self, x) -> tuple[int, ...]:
        x = np.asarray(x, dtype=float)
        idx = np.rint((x - self.lows) / self.h_grid).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.shape)):
            raise GeometryDomainError(f"{x} is outside the grid")
        return tuple(idx)


def make_domain(kind: Domain, h_grid: float, min_nodes: int = 16) -> GridDomain:
    """Discretize ``kind`` on a uniform grid of spacing ``h_grid``.

    The mask is the exact membership predicate evaluated at nodes and the
    distance field is the kind's boundary distance at interior nodes.
    """
    if not h_grid > 0:
        raise OutOfRangeError(f"h_grid={h_grid} must be positive")
    lo, hi = kind.bounding_box()
    extent = hi - lo
    if np.min(extent) / h_grid < min_nodes:
        raise GeometryDomainError(
            f"grid too coarse: narrowest extent {np.min(extent):.3g} spans fewer than "
            f"{min_nodes} nodes at h_grid={h_grid}"
        )
    shape = tuple(int(math.floor(e / h_grid + 0.5)) + 1 for e in extent)
    dom = GridDomain(
        kind=kind,
        n=kind.dim,
        h_grid=float(h_grid),
        lows=lo.copy(),
        shape=shape,
        mask=np.zeros(shape, dtype=bool),
        dx=np.zeros(shape),
        diam=kind.diameter(),
        d0=None,
    )
    pts = dom.node_points()
    inside = kind.membership_margin(pts) > 0.0
    dom.mask = inside.reshape(shape)
    dist = np.zeros(pts.shape[0])
    if inside.any():
        dist[inside] = np.maximum(kind.grid_distance(pts[inside]), 0.0)
    dom.dx = dist.reshape(shape)
    origin = np.zeros(kind.dim)
    if kind.contains(origin):
        dom.d0 = kind.dist_to_boundary(origin)
    return dom


@dataclass
class ConvexityReport:
    """Outcome of a sampled set-inclusion certificate."""

    ok: bool
    worst_margin: float
    worst_point: np.ndarray
    samples: int
    detail: dict = field(default_factory=dict)


def check_exterior_convexity(
    kind: Domain,
    x0,
    profile: AnisotropyProfile,
    sample_count: int = 100_000,
    rng: np.random.Generator | None = None,
    tol: float = 1e-12,
) -> ConvexityReport:
    """Sampled certificate that the domain lies above the model hypersurface at x0.

    After translating x0 to the origin and rotating the inward normal to
    +e_n, every sampled interior point must satisfy
    x_n > sum eta_i |x_i|^a_i.  Reports the minimal slack over the sample.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    x0 = np.asarray(x0, dtype=float)
    Q = rotation_to_axis(kind.inward_normal(x0))
    pts = kind.sample_interior(sample_count, rng)
    y = (pts - x0) @ Q.T
    margins = y[:, -1] - profile.height(y[:, :-1])
    j = int(np.argmin(margins))
    worst = float(margins[j])
    return ConvexityReport(
        ok=worst > -tol,
        worst_margin=worst,
        worst_point=pts[j],
        samples=sample_count,
    )


def check_interior_convexity(
    kind: Domain,
    x0,
    profile: AnisotropyProfile,
    sample_count: int = 100_000,
    rng: np.random.Generator | None = None,
    tol: float = 1e-12,
) -> ConvexityReport:
    """Sampled certificate of the two interior-condition inclusions at x0.

    (a) the model region {sum eta_i|x_i|^a_i < x_n < h} maps into the domain,
    (b) the domain maps into the half-space {x_n > 0}.
    Margins are the domain's membership slack for (a) and x_n for (b).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    h = profile.require_h()
    x0 = np.asarray(x0, dtype=float)
    Q = rotation_to_axis(kind.inward_normal(x0))

    # (a) sample the model region in normalized coordinates, map back
    m = sample_count
    halfw = np.array(
        [(h / e) ** (1.0 / a) if a < A_CAP else _flat_halfwidth(e)
         for a, e in zip(profile.a, profile.eta)]
    )
    got = np.empty((0, kind.dim))
    tries = 0
    while got.shape[0] < m and tries < 200:
        xn = rng.uniform(0.0, h, size=2 * m)
        xp = rng.uniform(-halfw, halfw, size=(2 * m, kind.dim - 1))
        keep = profile.height(xp) < xn
        got = np.vstack([got, np.column_stack([xp[keep], xn[keep]])])
        tries += 1
    model_pts = got[:m]
    back = model_pts @ Q + x0  # Q orthogonal: inverse transform is y -> Q^T y + x0
    margin_a = kind.membership_margin(back)
    ja = int(np.argmin(margin_a))

    # (b) supporting half-space inclusion
    pts = kind.sample_interior(sample_count, rng)
    y = (pts - x0) @ Q.T
    margin_b = y[:, -1]
    jb = int(np.argmin(margin_b))

    worst = min(float(margin_a[ja]), float(margin_b[jb]))
    worst_pt = back[ja] if margin_a[ja] <= margin_b[jb] else pts[jb]
    return ConvexityReport(
        ok=worst > -tol,
        worst_margin=worst,
        worst_point=worst_pt,
        samples=sample_count,
        detail={
            "model_in_domain_margin": float(margin_a[ja]),
            "halfspace_margin": float(margin_b[jb]),
        },
    )


def normal_ray_samples(kind: Domain, x0, depths, tol: float = 1e-8) -> np.ndarray:
    """Points x0 + t * inward_normal verified to satisfy dist(p_t) = t.

    Depths must be nonnegative and increasing; a depth whose nearest
    boundary point is no longer x0 raises RayExitError.
    """
    x0 = np.asarray(x0, dtype=float)
    depths = np.asarray(depths, dtype=float)
    if depths.size and (np.any(depths < 0) or np.any(np.diff(depths) <= 0)):
        raise OutOfRangeError("depths must be nonnegative and strictly increasing")
    n = kind.inward_normal(x0)
    pts = x0[None, :] + depths[:, None] * n[None, :]
    for t, p in zip(depths, pts):
        if t == 0.0:
            continue
        if kind.membership_margin(p[None, :])[0] <= 0.0:
            raise RayExitError(f"depth {t} leaves the domain along the normal ray")
        d = kind.dist_to_boundary(p)
        if abs(d - t) > tol:
            raise RayExitError(
                f"depth {t}: nearest boundary point moved off x0 (dist={d:.3e})"
            )
    return pts


def dist_to_boundary(kind: Domain, x) -> float:
    """Distance from ``x`` (in the closure) to the domain boundary."""
    return kind.dist_to_boundary(x)
