import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maboundary.errors import HypothesisViolationError, InvalidProfileError, OutOfRangeError
from maboundary.exponents import (
    A_CAP,
    ExponentContext,
    abar,
    alpha,
    lambda_iterate,
    paper_lambda0,
    steps_to_reach,
    theta,
    upper_exponent_regime,
)


def test_abar_direct_values():
    assert abar((2.0, 2.0)) == 2.0
    assert abar((2.0,)) == 1.0
    assert abar((A_CAP,)) == 0.0


def test_abar_rejects_below_one():
    with pytest.raises(InvalidProfileError):
        abar((0.9,))


@given(st.lists(st.floats(min_value=1.0, max_value=50.0), min_size=1, max_size=6))
def test_abar_permutation_invariant(a):
    assert abar(tuple(a)) == pytest.approx(abar(tuple(reversed(a))), rel=0, abs=0)
    assert 0.0 <= abar(tuple(a)) <= 2.0 * len(a)


def test_theta_values():
    assert theta(ExponentContext(n=2, a=(2.0,), k=1.0)) == 0.5
    assert theta(ExponentContext(n=3, a=(2.0, 2.0), k=1.0)) == 0.5
    assert theta(ExponentContext(n=2, a=(A_CAP,), k=1.0)) == 0.375


def test_theta_requires_a_at_least_two():
    with pytest.raises(HypothesisViolationError):
        theta(ExponentContext(n=2, a=(1.5,), k=1.0))


@given(
    st.integers(min_value=2, max_value=5),
    st.floats(min_value=0.1, max_value=8.0),
    st.floats(min_value=2.0, max_value=40.0),
    st.floats(min_value=0.05, max_value=10.0),
)
def test_theta_range_and_monotonicity(n, k, a0, bump):
    a = (a0,) * (n - 1)
    t = theta(ExponentContext(n=n, a=a, k=k))
    assert 0.0 < t <= 0.5
    bigger = tuple(v + bump for v in a)
    assert theta(ExponentContext(n=n, a=bigger, k=k)) < t
    # decreasing in n at fixed abar: extend by a flat direction (contributes 0)
    assert theta(ExponentContext(n=n + 1, a=a + (A_CAP,), k=k)) < t


def test_alpha_values():
    assert alpha(ExponentContext(n=3, a=(2.0, 2.0), q=0.0)) == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert alpha(ExponentContext(n=2, a=(2.0,), q=1.0)) == 3.0
    assert alpha(ExponentContext(n=4, a=(A_CAP,) * 3, q=1.0)) == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_alpha_fixed_point_identity():
    for (n, q, a) in [(3, 1.0, (2.0, 4.0)), (2, 0.5, (3.0,)), (5, 2.5, (2.0,) * 4)]:
        ctx = ExponentContext(n=n, a=a, q=q)
        al = alpha(ctx)
        assert al == pytest.approx(q * al / n + (abar(a) + 2.0) / n, rel=1e-15)


def test_q_out_of_range():
    with pytest.raises(OutOfRangeError):
        ExponentContext(n=2, a=(2.0,), q=2.0)


def test_regime_cases():
    r = upper_exponent_regime(ExponentContext(n=5, a=(4.0,) * 4, q=0.0))
    assert r.case == "1.4(1)-strict" and r.attained
    assert r.lambda_sup == pytest.approx(4.0 / 5.0, rel=1e-15)

    r = upper_exponent_regime(ExponentContext(n=2, a=(2.0,), q=0.0))
    assert r.case == "1.4(1)-flat" and not r.attained and r.lambda_sup == 1.0

    r = upper_exponent_regime(ExponentContext(n=4, a=(A_CAP,) * 3, q=1.0))
    assert r.case == "1.4(2)-subcritical" and not r.attained
    assert r.lambda_sup == pytest.approx(2.0 / 3.0, rel=1e-15)

    r = upper_exponent_regime(ExponentContext(n=2, a=(2.0,), q=1.5))
    assert r.case == "1.4(2)-supercritical" and r.lambda_sup == 1.0


def test_regime_tie_routes_to_weaker_clause():
    # n - abar - 2 = 0 exactly (n=4, a=(2,2,2)): q=0 must take the open clause
    r = upper_exponent_regime(ExponentContext(n=4, a=(2.0, 2.0, 2.0), q=0.0))
    assert r.case == "1.4(1)-flat" and r.lambda_sup == 1.0
    # q = n - abar - 2 exactly: supercritical (lambda_sup = 1) wins the tie
    r = upper_exponent_regime(ExponentContext(n=5, a=(4.0,) * 4, q=1.0))
    assert r.margin == 1.0 and r.case == "1.4(2)-supercritical"


def test_lambda_iterate_worked_value():
    ctx = ExponentContext(n=4, a=(A_CAP,) * 3, q=1.0)
    seq = lambda_iterate(ctx, 0.75, 1)
    assert seq.values[1] == pytest.approx(11.0 / 16.0, rel=1e-15)
    assert seq.gaps[1] / seq.gaps[0] == pytest.approx(0.25, rel=1e-15)


def test_lambda_iterate_q0_one_step():
    ctx = ExponentContext(n=3, a=(2.0, 2.0), q=0.0)
    seq = lambda_iterate(ctx, 0.9, 3)
    assert seq.values[1] == pytest.approx(alpha(ctx), rel=1e-15)
    assert seq.gaps[1] == 0.0


@pytest.mark.parametrize(
    "n,q,a,lam0",
    [
        (4, 1.0, (A_CAP,) * 3, 0.75),  # downward (section-6 style)
        (3, 2.0, (2.0, 2.0), 4.0 / 3.0),  # upward (section-5 style)
        (2, 1.0, (2.0,), 2.0),  # downward from (q+abar+2)/n
    ],
)
def test_lambda_iterate_exact_geometric(n, q, a, lam0):
    ctx = ExponentContext(n=n, a=a, q=q)
    seq = lambda_iterate(ctx, lam0, 30)
    gap0 = lam0 - seq.alpha
    r = q / n
    for j, g in enumerate(seq.gaps):
        assert g == pytest.approx(gap0 * r**j, rel=1e-12)
    # log|gap| affine in j with slope log(q/n)
    logs = np.log(np.abs(seq.gaps))
    slopes = np.diff(logs)
    assert np.allclose(slopes, math.log(r), rtol=1e-12, atol=1e-12)


def test_lambda_iterate_recurrence_consistency():
    ctx = ExponentContext(n=3, a=(2.0, 4.0), q=1.5)
    seq = lambda_iterate(ctx, paper_lambda0(ctx, "downward"), 12)
    ab = abar(ctx.a)
    for j in range(12):
        expect = ctx.q * seq.values[j] / ctx.n + (ab + 2.0) / ctx.n
        assert seq.values[j + 1] == pytest.approx(expect, rel=1e-13)


def _unroll_steps(lam0, al, ratio, target):
    gap, limit, j = abs(lam0 - al), abs(target - al), 0
    while gap > limit:
        gap *= ratio
        j += 1
    return j


def test_steps_to_reach_matches_unrolled_recurrence():
    ctx = ExponentContext(n=4, a=(A_CAP,) * 3, q=1.0)
    al = alpha(ctx)
    got = steps_to_reach(ctx, 0.75, 0.67)
    assert got == _unroll_steps(0.75, al, 0.25, 0.67)
    # closed form ceil(log(gap_t/gap_0)/log(ratio))
    closed = math.ceil(math.log(abs(0.67 - al) / abs(0.75 - al)) / math.log(0.25) - 1e-12)
    assert got == closed

    ctx2 = ExponentContext(n=3, a=(2.0, 2.0), q=2.0)
    al2 = alpha(ctx2)  # upward case: lambda0 = 2 toward alpha = 4
    lam0 = (2.0 + 2.0 + 2.0) / 3.0
    target = 3.9
    assert steps_to_reach(ctx2, lam0, target) == _unroll_steps(lam0, al2, 2.0 / 3.0, target)


def test_steps_to_reach_edges():
    ctx = ExponentContext(n=4, a=(A_CAP,) * 3, q=1.0)
    assert steps_to_reach(ctx, 0.75, 0.75) == 0
    ctx0 = ExponentContext(n=3, a=(2.0, 2.0), q=0.0)
    assert steps_to_reach(ctx0, 0.9, alpha(ctx0) - 1e-9) == 1
    with pytest.raises(OutOfRangeError):
        steps_to_reach(ctx, 0.75, 0.8)  # outside (alpha, lambda0]
    with pytest.raises(OutOfRangeError):
        steps_to_reach(ctx, 0.75, 0.6)  # beyond the fixed point
