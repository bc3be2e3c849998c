import math

import numpy as np
import pytest

from maboundary.barriers import (
    DegenerateBarrierReport,
    EllipsoidSpec,
    EpsilonReport,
    PowerBarrierSpec,
    _jet_arrays,
    _sample_model_region,
    degenerate_barrier_check,
    det_hessian,
    ellipsoid_barrier,
    epsilon_one,
    epsilon_two,
    H_functional,
    power_barrier_jet,
    select_epsilon,
    thm13_lower_value,
    thm15_step1_bound,
)
from maboundary.errors import (
    AssumptionViolationError,
    BarrierDomainError,
    HypothesisViolationError,
    NotConvexHereError,
    OutOfRangeError,
)
from maboundary.exponents import ExponentContext, abar, theta
from maboundary.geometry import AnisotropyProfile


@pytest.fixture
def spec_2d():
    return PowerBarrierSpec(
        profile=AnisotropyProfile(a=(2.0,), eta=(1.0,)), exponent=0.5, epsilon=0.1
    )


def test_jet_worked_values(spec_2d):
    jet = power_barrier_jet(spec_2d, [0.0, 0.05])
    assert jet.value == pytest.approx(-math.sqrt(0.5), rel=1e-12)
    assert jet.hessian[0, 0] == pytest.approx(math.sqrt(2.0), rel=1e-9)
    assert jet.hessian[0, 1] == 0.0
    assert jet.hessian[1, 1] == pytest.approx(70.71067811865476, rel=1e-9)
    assert det_hessian(jet) == pytest.approx(100.0, rel=1e-9)


def test_jet_zero_level_set(spec_2d):
    # (x_n/eps)^(2/a) = x_1^2 on the admissible-region boundary: W -> 0
    x = [0.5, 0.025 + 1e-13]
    jet = power_barrier_jet(spec_2d, x)
    assert abs(jet.value) < 1e-6
    with pytest.raises(BarrierDomainError):
        power_barrier_jet(spec_2d, [0.5, 0.025 - 1e-9])


def test_jet_domain_errors(spec_2d):
    with pytest.raises(BarrierDomainError):
        power_barrier_jet(spec_2d, [0.0, -0.1])
    with pytest.raises(BarrierDomainError):
        power_barrier_jet(spec_2d, [2.0, 0.05])


def _value_extended(spec, x):
    """Barrier value in extended precision (FD oracle needs headroom below
    the double roundoff floor eps*|W|/step^2 of second differences)."""
    a = np.asarray(spec.profile.a, dtype=np.longdouble)
    q = a * np.longdouble(spec.exponent) / 2.0
    eps = np.longdouble(spec.epsilon)
    x = np.asarray(x, dtype=np.longdouble)
    t = x[-1] / eps
    g = t ** (2.0 / a) - x[:-1] ** 2
    assert np.all(g > 0)
    return -np.sum(g**q)


def _fd_jet(spec, x, step=1e-5):
    """Central-difference gradient and Hessian of the barrier value."""
    x = np.asarray(x, dtype=np.longdouble)
    n = x.size
    step = np.longdouble(step)

    def val(p):
        return _value_extended(spec, p)

    grad = np.empty(n)
    hess = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n, dtype=np.longdouble)
        e[i] = step
        grad[i] = float((val(x + e) - val(x - e)) / (2 * step))
        hess[i, i] = float((val(x + e) - 2 * val(x) + val(x - e)) / step**2)
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n, dtype=np.longdouble)
            ej = np.zeros(n, dtype=np.longdouble)
            ei[i] = step
            ej[j] = step
            hess[i, j] = hess[j, i] = float(
                (val(x + ei + ej) - val(x + ei - ej) - val(x - ei + ej) + val(x - ei - ej))
                / (4 * step**2)
            )
    return grad, hess


@pytest.mark.parametrize(
    "a,eta,expnt,eps",
    [
        ((2.0,), (1.0,), 0.5, 0.05),
        ((3.0,), (1.0,), 0.45, 0.04),
        ((2.0, 4.0), (1.0, 0.7), 0.5, 0.03),
    ],
)
def test_jet_matches_central_differences(a, eta, expnt, eps):
    spec = PowerBarrierSpec(
        profile=AnisotropyProfile(a=a, eta=eta), exponent=expnt, epsilon=eps
    )
    rng = np.random.default_rng(42)
    X = _sample_model_region(spec.profile, 100, 0.5, rng, xn_min_frac=0.05)
    X[:, :-1] *= 0.8  # stay away from the admissible-region boundary
    for x in X:
        jet = power_barrier_jet(spec, x)
        g_fd, h_fd = _fd_jet(spec, x)
        assert np.linalg.norm(jet.gradient - g_fd) <= 1e-6 * np.linalg.norm(g_fd)
        assert np.linalg.norm(jet.hessian - h_fd) <= 1e-6 * np.linalg.norm(h_fd)
        # Schur determinant against the dense LU determinant
        dense = float(np.linalg.det(jet.hessian))
        assert det_hessian(jet) == pytest.approx(dense, rel=1e-10)


def test_det_hessian_identity_and_error():
    from maboundary.barriers import BarrierJet

    jet = BarrierJet(value=0.0, gradient=np.zeros(3), hessian=np.eye(3))
    assert det_hessian(jet) == 1.0
    bad = BarrierJet(value=0.0, gradient=np.zeros(2), hessian=np.diag([-1.0, 2.0]))
    with pytest.raises(NotConvexHereError):
        det_hessian(bad)


def test_axis_slice_identity(spec_2d):
    # on x' = 0: W = -(n-1)(x_n/eps)^theta exactly, every xi_i = 1
    for xn in (0.01, 0.05, 0.2):
        jet = power_barrier_jet(spec_2d, [0.0, xn])
        assert jet.value == pytest.approx(-((xn / 0.1) ** 0.5), rel=1e-14)
        assert np.allclose(jet.diagnostics["xi"], 1.0, atol=1e-14)


def test_xi_range_invariant():
    prof = AnisotropyProfile(a=(2.0, 4.0), eta=(1.0, 0.8))
    spec = PowerBarrierSpec(profile=prof, exponent=0.45, epsilon=0.05)
    rng = np.random.default_rng(1)
    X = _sample_model_region(prof, 5_000, 1.5, rng)
    _, _, _, _, _, xi, valid = _jet_arrays(spec, X)
    assert valid.all()
    delta = spec.delta()
    b = np.array(spec.b)
    lo = (1.0 - delta) ** (1.0 / b)
    assert np.all(xi <= 1.0 + 1e-12)
    assert np.all(xi >= lo[None, :] - 1e-12)


def test_H_functional_k0_reduction(spec_2d):
    ctx0 = ExponentContext(n=2, a=(2.0,), k=1e-300)
    jet = power_barrier_jet(spec_2d, [0.01, 0.05])
    det = det_hessian(jet)
    h = H_functional(spec_2d, ctx0, [0.01, 0.05])
    assert h == pytest.approx(det * abs(jet.value) ** (2 + 1e-300 + 2), rel=1e-9)


def test_H_functional_drift_violation():
    # shift y0 chosen to make (x + y0) . DW - W negative
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,))
    spec = PowerBarrierSpec(profile=prof, exponent=0.5, epsilon=0.1, y0=(0.0, 50.0))
    ctx = ExponentContext(n=2, a=(2.0,), k=1.0)
    with pytest.raises(AssumptionViolationError):
        H_functional(spec, ctx, [0.01, 0.05])


def test_epsilon_one_worked_value():
    assert epsilon_one(AnisotropyProfile((2.0,), (1.0,)), 0.5, 2.0) == pytest.approx(
        0.03125, rel=1e-15
    )


def test_epsilon_two_solves_delta_bound():
    prof = AnisotropyProfile(a=(2.0, 4.0), eta=(0.8, 1.2))
    th = 0.45
    e2 = epsilon_two(prof, th)
    spec = PowerBarrierSpec(profile=prof, exponent=th, epsilon=e2 * (1.0 - 1e-9))
    assert spec.delta() < 1.0 - th
    spec_big = PowerBarrierSpec(profile=prof, exponent=th, epsilon=min(e2 * 1.01, 0.79))
    assert spec_big.delta() >= 1.0 - th or e2 * 1.01 > 0.79


def test_select_epsilon_certifies(tmp_path):
    ctx = ExponentContext(n=2, a=(2.0,), k=1.0)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,))
    rep = select_epsilon(ctx, prof, d0=0.5, diam=2.0, sample_count=10_000, seed=5)
    assert isinstance(rep, EpsilonReport)
    assert rep.epsilon0 <= min(rep.epsilon1, rep.epsilon2, 1.0)
    assert rep.epsilon0 <= 0.03125
    assert rep.min_H > 1.0
    assert rep.samples == 10_000
    # certified inequality on a fresh independent sample
    from maboundary.barriers import _certify_H

    spec = PowerBarrierSpec(
        profile=prof, exponent=theta(ctx), epsilon=rep.epsilon0, y0=(0.0, -0.5)
    )
    min_h, _ = _certify_H(spec, ctx, 10_000, 2.0, np.random.default_rng(999))
    assert min_h > 1.0


def test_select_epsilon_requires_a_ge_2():
    ctx = ExponentContext(n=2, a=(1.5,), k=1.0)
    prof = AnisotropyProfile(a=(1.5,), eta=(1.0,))
    with pytest.raises(HypothesisViolationError):
        select_epsilon(ctx, prof, d0=0.5, diam=2.0)


def test_hessian_positive_definite_at_selected_epsilon():
    ctx = ExponentContext(n=3, a=(2.0, 4.0), k=2.0)
    prof = AnisotropyProfile(a=(2.0, 4.0), eta=(1.0, 1.0))
    rep = select_epsilon(ctx, prof, d0=0.5, diam=2.0, sample_count=4_000, seed=2)
    spec = PowerBarrierSpec(
        profile=prof, exponent=theta(ctx), epsilon=rep.epsilon0, y0=(0.0, 0.0, -0.5)
    )
    X = _sample_model_region(prof, 4_000, 2.0, np.random.default_rng(77))
    from maboundary.barriers import _det_arrays

    _, _, Hd, Hm, Hnn, _, valid = _jet_arrays(spec, X)
    det, convex = _det_arrays(Hd, Hm, Hnn)
    assert valid.all() and convex.all()
    assert np.all(det > 0.0)


def test_degenerate_barrier_case1_exponent_cancellation():
    ctx = ExponentContext(n=5, a=(4.0,) * 4, q=0.0)
    prof = AnisotropyProfile(a=(4.0,) * 4, eta=(1.0,) * 4)
    rep = degenerate_barrier_check(ctx, prof, lam=0.8, M_rhs=1.0, sample_count=3_000, diam=2.0)
    assert isinstance(rep, DegenerateBarrierReport)
    assert rep.case == "case1"
    assert rep.exponent == pytest.approx(0.0, abs=1e-12)
    assert rep.passed and rep.min_det >= 1.0


def test_degenerate_barrier_case1_needs_exact_lambda():
    ctx = ExponentContext(n=5, a=(4.0,) * 4, q=0.0)
    prof = AnisotropyProfile(a=(4.0,) * 4, eta=(1.0,) * 4)
    with pytest.raises(HypothesisViolationError):
        degenerate_barrier_check(ctx, prof, lam=0.7, M_rhs=1.0)


def test_degenerate_barrier_case2():
    ctx = ExponentContext(n=2, a=(2.0,), q=1.0)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,))
    rep = degenerate_barrier_check(ctx, prof, lam=0.9, M_rhs=2.0, sample_count=3_000, diam=2.0)
    assert rep.case == "case2"
    assert rep.exponent == pytest.approx(2 * 0.9 - 1.0 - 2.0, rel=1e-12)  # -1.2
    assert rep.passed and rep.min_det >= 2.0
    with pytest.raises(HypothesisViolationError):
        degenerate_barrier_check(ctx, prof, lam=0.4, M_rhs=1.0)  # lam <= abar/n


@pytest.fixture
def ell_spec():
    return EllipsoidSpec(
        profile=AnisotropyProfile(a=(2.0,), eta=(1.0,), h=1.0), h_tilde=0.4, c=0.25
    )


def test_ellipsoid_worked_cell(ell_spec):
    v, H, det = ellipsoid_barrier(ell_spec, 0.01, ell_spec.center)
    assert v == pytest.approx(-0.01, rel=1e-14)
    assert det == pytest.approx(1.6, rel=1e-12)
    assert det == pytest.approx(ell_spec.det_closed_form(0.01), rel=1e-12)


def test_ellipsoid_level_set_and_domain(ell_spec):
    bpt = ell_spec.center + np.array([ell_spec.semi_axes[0], 0.0])
    v, _, _ = ellipsoid_barrier(ell_spec, 0.01, bpt)
    assert v == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(BarrierDomainError):
        ellipsoid_barrier(ell_spec, 0.01, ell_spec.center + np.array([0.0, 0.2]))


def test_ellipsoid_sits_in_band_and_v2(ell_spec):
    axes = ell_spec.semi_axes
    c = ell_spec.center
    assert c[-1] - axes[-1] >= ell_spec.h_tilde / 2.0 - 1e-15
    assert c[-1] + axes[-1] <= ell_spec.h_tilde + 1e-15
    assert ell_spec.v2_margin(5_000) > 0.0


def test_ellipsoid_closed_form_random_draws():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(2, 4))
        a = tuple(rng.uniform(1.0, 6.0, n - 1))
        eta = tuple(rng.uniform(0.3, 2.0, n - 1))
        h_tilde = float(rng.uniform(0.05, 0.45))
        c = float(rng.uniform(0.05, 0.25))
        eps = float(rng.uniform(1e-4, 0.5))
        spec = EllipsoidSpec(
            profile=AnisotropyProfile(a=a, eta=eta, h=1.0), h_tilde=h_tilde, c=c
        )
        _, _, det = ellipsoid_barrier(spec, eps, spec.center)
        assert det == pytest.approx(spec.det_closed_form(eps), rel=1e-12)


def test_ellipsoid_spec_validation():
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=1.0)
    with pytest.raises(OutOfRangeError):
        EllipsoidSpec(profile=prof, h_tilde=0.6)  # above h/2
    with pytest.raises(OutOfRangeError):
        EllipsoidSpec(profile=prof, h_tilde=0.4, c=0.3)


def test_thm15_scaling_law():
    ctx = ExponentContext(n=2, a=(2.0,), q=1.0)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=1.0)
    reports = [
        thm15_step1_bound(ctx, prof, h_tilde=ht, K=1.0, diam=2.0)
        for ht in (0.4, 0.2, 0.1)
    ]
    lam0 = (1.0 + 1.0 + 2.0) / 2.0
    assert all(r.lambda0 == pytest.approx(lam0, rel=1e-14) for r in reports)
    ratios = [r.epsilon / ht**lam0 for r, ht in zip(reports, (0.4, 0.2, 0.1))]
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)
    assert ratios[1] == pytest.approx(ratios[2], rel=1e-12)
    # the induced center bound is |W(center)| = epsilon itself
    assert reports[0].center_bound == reports[0].epsilon
    # the barrier determinant at this epsilon does not exceed the rhs floor
    spec = EllipsoidSpec(profile=prof, h_tilde=0.4)
    assert spec.det_closed_form(reports[0].epsilon) <= reports[0].rhs_floor * (1 + 1e-12)


def test_thm15_q0_scaling():
    ctx = ExponentContext(n=2, a=(2.0,), q=0.0)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=1.0)
    r1 = thm15_step1_bound(ctx, prof, h_tilde=0.4, K=1.0, diam=2.0)
    r2 = thm15_step1_bound(ctx, prof, h_tilde=0.1, K=1.0, diam=2.0)
    lam0 = (0.0 + 1.0 + 2.0) / 2.0
    assert r1.epsilon / 0.4**lam0 == pytest.approx(r2.epsilon / 0.1**lam0, rel=1e-12)


@pytest.mark.slow
def test_thm13_scaling_and_monotonicity():
    ctx = ExponentContext(n=2, a=(2.0,), k=1.0)
    prof = AnisotropyProfile(a=(2.0,), eta=(1.0,), h=1.0)
    th = theta(ctx)
    v1 = thm13_lower_value(ctx, prof, h_tilde=0.4, C1=0.01)
    v2 = thm13_lower_value(ctx, prof, h_tilde=0.1, C1=0.01)
    assert v1 / 0.4**th == pytest.approx(v2 / 0.1**th, rel=1e-9)
    v3 = thm13_lower_value(ctx, prof, h_tilde=0.4, C1=0.02)
    assert v3 > v1  # deeper rescaled solution for a larger coefficient
    v4 = thm13_lower_value(ctx, prof, h_tilde=0.4, diam=2.0)  # default C1 path
    assert v4 > 0.0
