import math

import numpy as np
import pytest

from maboundary.errors import (
    GeometryDomainError,
    InvalidProfileError,
    OutOfRangeError,
    RayExitError,
)
from maboundary.exponents import A_CAP
from maboundary.geometry import (
    AnisotropyProfile,
    Ball,
    Box,
    ModelRegion,
    Superellipse,
    check_exterior_convexity,
    check_interior_convexity,
    dist_to_boundary,
    make_domain,
    normal_ray_samples,
    rotation_to_axis,
)


@pytest.fixture(scope="module")
def ball():
    return Ball(1.0)


def test_profile_validation():
    with pytest.raises(InvalidProfileError):
        AnisotropyProfile(a=(0.5,), eta=(1.0,))
    with pytest.raises(InvalidProfileError):
        AnisotropyProfile(a=(2.0, 2.0), eta=(1.0,))
    with pytest.raises(InvalidProfileError):
        AnisotropyProfile(a=(2.0,), eta=(-1.0,))


def test_model_membership_worked_example():
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=0.5)
    mr = ModelRegion(prof)
    assert mr.contains([0.0, 0.25])
    assert not mr.contains([0.6, 0.25])  # 0.25 < 0.36


def test_ball_distance_exact(ball):
    assert dist_to_boundary(ball, [0.3, 0.0]) == pytest.approx(0.7, abs=1e-14)
    assert dist_to_boundary(ball, [0.0, -1.0]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(GeometryDomainError):
        dist_to_boundary(ball, [1.5, 0.0])


def test_box_distance_and_degenerate():
    box = Box([-1.0, 0.0], [1.0, 2.0])
    assert dist_to_boundary(box, [0.5, 1.0]) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(GeometryDomainError):
        Box([0.0, 0.0], [1.0, 0.0])


def test_model_distance_vs_brute_force():
    # oracle: dense sampling of the parabola boundary (1e6+1 points)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=0.5)
    mr = ModelRegion(prof)
    ts = np.linspace(-1.0, 1.0, 1_000_001)
    curve = np.stack([ts, ts**2], axis=1)
    for p in ([0.0, 0.1], [0.2, 0.3], [-0.3, 0.45], [0.1, 0.02]):
        p = np.array(p)
        brute = min(np.sqrt(((curve - p) ** 2).sum(axis=1)).min(), prof.h - p[1])
        assert mr.dist_to_boundary(p) == pytest.approx(brute, abs=5e-7)


def test_superellipse_distance_vs_brute_force():
    se = Superellipse((1.0, 0.8), (4.0, 2.0))
    phis = np.linspace(0.0, 2.0 * np.pi, 200_000, endpoint=False)
    dirs = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    bpts = se._radial_boundary(dirs)
    for p in ([0.0, 0.0], [0.5, 0.1], [-0.2, -0.5]):
        p = np.array(p)
        brute = np.sqrt(((bpts - p) ** 2).sum(axis=1)).min()
        assert se.dist_to_boundary(p) == pytest.approx(brute, abs=1e-6)


def test_rotation_maps_normal_to_axis():
    for v in ([0.0, 1.0], [1.0, 0.0], [0.6, -0.8], [1.0, 2.0, -2.0]):
        v = np.asarray(v) / np.linalg.norm(v)
        Q = rotation_to_axis(v)
        assert np.allclose(Q @ v, np.eye(len(v))[-1], atol=1e-14)
        assert np.allclose(Q @ Q.T, np.eye(len(v)), atol=1e-14)


def test_make_domain_node_count(ball):
    gd = make_domain(ball, 1.0 / 64.0)
    expect = math.pi / (1.0 / 64.0) ** 2
    assert abs(gd.interior_count - expect) / expect < 0.02
    assert gd.d0 == pytest.approx(1.0, abs=1e-12)


def test_make_domain_too_coarse(ball):
    with pytest.raises(GeometryDomainError):
        make_domain(ball, 0.2)  # only 10 nodes across the diameter


def test_grid_distance_matches_analytic(ball):
    gd = make_domain(ball, 1.0 / 32.0)
    pts = gd.interior_points()
    analytic = 1.0 - np.linalg.norm(pts, axis=1)
    assert np.max(np.abs(gd.dx[gd.mask] - analytic)) < gd.h_grid / 2.0


def test_grid_distance_model_within_half_h():
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=0.5)
    mr = ModelRegion(prof)
    gd = make_domain(mr, 1.0 / 48.0)
    pts = gd.interior_points()
    rng = np.random.default_rng(0)
    take = rng.choice(pts.shape[0], size=60, replace=False)
    for j in take:
        d_exact = mr.dist_to_boundary(pts[j])
        assert abs(gd.dx[gd.mask][j] - d_exact) <= gd.h_grid / 2.0


def test_grid_mask_matches_predicate(ball):
    gd = make_domain(ball, 1.0 / 32.0)
    pts = gd.node_points()
    assert np.array_equal(gd.mask.ravel(), ball.membership_margin(pts) > 0.0)


def test_midpoint_convexity(ball):
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=0.5)
    for kind in (ball, ModelRegion(prof), Superellipse((1.0, 0.8), (4.0, 2.0))):
        rng = np.random.default_rng(3)
        pts = kind.sample_interior(20_000, rng)
        mid = 0.5 * (pts[:10_000] + pts[10_000:])
        assert bool(np.all(kind.membership_margin(mid) > 0.0))


def test_exterior_convexity_ball_curvature_threshold(ball):
    rng = np.random.default_rng(11)
    x0 = [0.0, -1.0]
    # true for eta below the curvature bound 1/2, monotone in eta
    for eta, expect in [(0.3, True), (0.45, True), (0.7, False), (10.0, False)]:
        rep = check_exterior_convexity(
            ball, x0, AnisotropyProfile((2.0,), (eta,)), 60_000, rng
        )
        assert rep.ok is expect, (eta, rep.worst_margin)


def test_exterior_convexity_box_face():
    box = Box([-1.0, 0.0], [1.0, 2.0])
    x0 = [0.0, 0.0]
    rng = np.random.default_rng(5)
    rep = check_exterior_convexity(box, x0, AnisotropyProfile((2.0,), (0.5,)), 40_000, rng)
    assert not rep.ok  # flat face violates any finite-exponent inclusion
    rep_flat = check_exterior_convexity(box, x0, AnisotropyProfile((A_CAP,), (0.5,)), 40_000, rng)
    assert rep_flat.ok


def test_interior_convexity_cases(ball):
    rng = np.random.default_rng(7)
    x0 = [0.0, -1.0]
    own = ModelRegion(AnisotropyProfile((2.0,), (1.0,), h=0.5))
    rep = check_interior_convexity(own, [0.0, 0.0], own.profile, 30_000, rng)
    assert rep.ok  # inclusion by construction

    rep = check_interior_convexity(
        ball, x0, AnisotropyProfile((2.0,), (2.0,), h=0.5), 30_000, rng
    )
    assert rep.ok  # eta large, h small

    # cone-sharp wedge with eta=0.5, h=0.5 pokes outside the disk
    # (cross-sections fit only up to height 2 eta^2/(1+eta^2) = 0.4 < h)
    rep = check_interior_convexity(
        ball, x0, AnisotropyProfile((1.0,), (0.5,), h=0.5), 30_000, rng
    )
    assert not rep.ok


def test_normal_ray_samples_ball(ball):
    pts = normal_ray_samples(ball, [0.0, -1.0], [0.1, 0.2])
    assert np.allclose(pts, [[0.0, -0.9], [0.0, -0.8]], atol=1e-12)
    pts0 = normal_ray_samples(ball, [0.0, -1.0], [0.0])
    assert np.allclose(pts0, [[0.0, -1.0]])


def test_normal_ray_model_axis():
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=0.9)
    mr = ModelRegion(prof)
    depths = [0.05, 0.1, 0.2]
    pts = normal_ray_samples(mr, [0.0, 0.0], depths)
    for t, p in zip(depths, pts):
        assert np.allclose(p, [0.0, t], atol=1e-12)
        assert mr.dist_to_boundary(p) == pytest.approx(t, abs=1e-8)


def test_normal_ray_exit_error(ball):
    # past the center, the nearest boundary point is no longer x0
    with pytest.raises(RayExitError):
        normal_ray_samples(ball, [0.0, -1.0], [0.5, 1.5])
    with pytest.raises(OutOfRangeError):
        normal_ray_samples(ball, [0.0, -1.0], [0.2, 0.1])
