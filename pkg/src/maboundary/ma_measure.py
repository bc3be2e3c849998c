"""Monge-Ampere measures of piecewise-linear convex functions (2-D).

The measure of a node is the area of its subgradient image: the convex
polygon spanned by the gradients of the lower-hull facets incident to the
node after lifting (x, y) -> (x, y, f(x, y)).  Vertex cells tile the total
gradient image up to measure zero, nodes interior to flat facets carry no
mass, and boundary nodes are excluded by policy (the measure is defined on
interior Borel sets only).

This module is the measure-theoretic test oracle for the grid solver; it
also hosts the numerical comparison-principle checker.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BoundaryNodeError, ComparisonHypothesisError, InvalidProfileError

_MERGE_TOL = 1e-12


def _polygon_area(pts: np.ndarray) -> float:
    """Shoelace area of points already in convex position (any order)."""
    if pts.shape[0] < 3:
        return 0.0
    c = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    p = pts[np.argsort(ang)]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _dedupe(pts: np.ndarray, tol: float) -> np.ndarray:
    if pts.shape[0] == 0:
        return pts
    out = [pts[0]]
    for p in pts[1:]:
        if all(np.max(np.abs(p - q)) > tol for q in out):
            out.append(p)
    return np.array(out)


@dataclass
class PLConvexFunction:
    """Piecewise-linear convex interpolation of scattered 2-D samples."""

    nodes: np.ndarray
    values: np.ndarray
    facets: np.ndarray = field(init=False)  # (m, 3) node indices of lower-hull simplices
    gradients: np.ndarray = field(init=False)  # (m, 2) facet gradients
    hull_vertices: np.ndarray = field(init=False)  # bool: node is a lower-hull vertex
    boundary: np.ndarray = field(init=False)  # bool: node on the planar hull boundary
    _affine: tuple[float, float, float] | None = field(init=False, default=None)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise InvalidProfileError("PL machinery is 2-D: nodes must be (N, 2)")
        if self.values.shape != (self.nodes.shape[0],):
            raise InvalidProfileError("values must match nodes")
        if self.nodes.shape[0] < 3:
            raise InvalidProfileError("need at least 3 nodes")
        self._build()

    def _build(self):
        N = self.nodes.shape[0]
        scale = max(1.0, float(np.max(np.abs(self.values))))

        planar = ConvexHull(self.nodes)
        self.boundary = np.zeros(N, dtype=bool)
        # points on hull edges (not only vertices) are boundary nodes
        for eq in planar.equations:
            d = self.nodes @ eq[:2] + eq[2]
            self.boundary |= np.abs(d) < 1e-9 * max(1.0, np.max(np.abs(self.nodes)))

        lifted = np.column_stack([self.nodes, self.values])
        try:
            hull = ConvexHull(lifted)
        except QhullError:
            # all lifted points coplanar: f is affine, every mass is zero
            A = np.column_stack([self.nodes, np.ones(N)])
            coef, res, *_ = np.linalg.lstsq(A, self.values, rcond=None)
            fit = A @ coef
            if np.max(np.abs(fit - self.values)) > 1e-9 * scale:
                raise InvalidProfileError("degenerate lifted hull but data not affine")
            self._affine = (float(coef[0]), float(coef[1]), float(coef[2]))
            self.facets = np.empty((0, 3), dtype=int)
            self.gradients = np.empty((0, 2))
            self.hull_vertices = np.zeros(N, dtype=bool)
            return

        normals = hull.equations[:, :3]
        lower = normals[:, 2] < -_MERGE_TOL
        self.facets = hull.simplices[lower]
        nz = normals[lower, 2]
        self.gradients = -normals[lower, :2] / nz[:, None]
        self.hull_vertices = np.zeros(N, dtype=bool)
        self.hull_vertices[np.unique(self.facets)] = True

        # convexity: stored values must coincide with the lower-hull function,
        # i.e. lie on (vertices) or not above any supporting facet plane
        planes_max = np.full(N, -np.inf)
        for fct, g in zip(self.facets, self.gradients):
            b = self.values[fct[0]] - g @ self.nodes[fct[0]]
            planes_max = np.maximum(planes_max, self.nodes @ g + b)
        if np.max(planes_max - self.values) > 1e-9 * scale:
            j = int(np.argmax(planes_max - self.values))
            raise InvalidProfileError(
                f"values are not convex: node {self.nodes[j]} lies "
                f"{planes_max[j] - self.values[j]:.3e} below its convexification"
            )

    def is_redundant(self, node: int) -> bool:
        """Node carried by the hull but not as a vertex (flat region)."""
        if self._affine is not None:
            return True
        return not bool(self.hull_vertices[node])


def subgradient_cell(f: PLConvexFunction, node: int) -> np.ndarray:
    """Gradient-space polygon of the lower-hull facets incident to ``node``.

    The polygon's area is the node's Monge-Ampere mass.  Boundary nodes are
    rejected: their subgradient image is unbounded without a gradient
    convention on the boundary.
    """
    if f.boundary[node]:
        raise BoundaryNodeError(f"node {node} lies on the domain boundary")
    if f._affine is not None:
        g = np.array(f._affine[:2])
        return g[None, :]
    inc = np.any(f.facets == node, axis=1)
    grads = f.gradients[inc]
    if grads.shape[0] == 0:
        # node strictly above the lower hull cannot happen (convexity was
        # checked); a node interior to one flat facet has a single gradient
        return _supporting_gradient(f, node)[None, :]
    grads = _dedupe(grads, _MERGE_TOL)
    # lexicographic ordering for reproducible vertex lists
    order = np.lexsort((grads[:, 1], grads[:, 0]))
    return grads[order]


def _supporting_gradient(f: PLConvexFunction, node: int) -> np.ndarray:
    x = f.nodes[node]
    vals = f.gradients @ x + np.array(
        [f.values[fct[0]] - g @ f.nodes[fct[0]] for fct, g in zip(f.facets, f.gradients)]
    )
    return f.gradients[int(np.argmax(vals))]


@dataclass
class MAMeasure:
    """Nonnegative node masses |subgradient image| and their total."""

    masses: np.ndarray  # per node; NaN at boundary nodes (undefined by policy)
    total: float

    def mass_of(self, nodes) -> float:
        m = self.masses[np.asarray(nodes, dtype=int)]
        if np.any(np.isnan(m)):
            raise BoundaryNodeError("mass undefined on boundary nodes")
        return float(np.sum(m))


def ma_measure(f: PLConvexFunction) -> MAMeasure:
    """Per-node Monge-Ampere masses; cells tile the gradient image a.e."""
    N = f.nodes.shape[0]
    masses = np.full(N, np.nan)
    interior = ~f.boundary
    for j in np.flatnonzero(interior):
        masses[j] = _polygon_area(subgradient_cell(f, j))
    return MAMeasure(masses=masses, total=float(np.nansum(masses[interior])))


@dataclass
class ComparisonReport:
    holds: bool
    worst_gap: float
    worst_node: int | None
    tol: float
    detail: dict = field(default_factory=dict)


def verify_comparison(
    u_values,
    v_values,
    interior,
    mu_u,
    mu_v,
    tol: float | None = None,
    h_grid: float | None = None,
    mass_tol: float = 1e-9,
) -> ComparisonReport:
    """Numerical comparison-principle check: ordered boundary data plus
    dominated masses must give u >= v - tol at every interior node.

    ``interior`` is a boolean mask on the common node set; nodes off the
    mask are boundary nodes.  Hypothesis violations (boundary order or mass
    order) raise ComparisonHypothesisError, distinct from a conclusion
    failure which is reported with its worst counterexample node.
    """
    u = np.asarray(u_values, dtype=float).ravel()
    v = np.asarray(v_values, dtype=float).ravel()
    interior = np.asarray(interior, dtype=bool).ravel()
    mu_u = np.asarray(mu_u, dtype=float).ravel()
    mu_v = np.asarray(mu_v, dtype=float).ravel()
    if not (u.shape == v.shape == interior.shape):
        raise ComparisonHypothesisError("u, v and interior mask must be same-shaped")
    if tol is None:
        if h_grid is None:
            raise ComparisonHypothesisError("give tol or h_grid for the default 10 h^2")
        tol = 10.0 * h_grid**2

    bdry = ~interior
    if np.any(u[bdry] < v[bdry] - 1e-12):
        j = int(np.flatnonzero(bdry)[np.argmin((u - v)[bdry])])
        raise ComparisonHypothesisError(
            f"boundary ordering fails at node {j}: u={u[j]:.6g} < v={v[j]:.6g}"
        )
    if mu_u.shape != mu_v.shape:
        raise ComparisonHypothesisError("mass arrays must be same-shaped")
    if np.any(mu_u > mu_v + mass_tol):
        j = int(np.argmax(mu_u - mu_v))
        raise ComparisonHypothesisError(
            f"mass ordering fails on cell {j}: mu_u={mu_u[j]:.6g} > mu_v={mu_v[j]:.6g}"
        )

    gap = (u - v)[interior]
    worst = float(np.min(gap)) if gap.size else 0.0
    holds = worst >= -tol
    worst_node = int(np.flatnonzero(interior)[np.argmin(gap)]) if gap.size else None
    return ComparisonReport(
        holds=holds,
        worst_gap=worst,
        worst_node=None if holds else worst_node,
        tol=tol,
        detail={"min_interior_gap": worst},
    )
