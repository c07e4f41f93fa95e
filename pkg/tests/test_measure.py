import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jop.errors import InsufficientMoments, NonIntegrable
from jop.measure import (IntervalMeasure, gram_matrix, hankel_is_positive, inner_product,
                         moments)
from jop.measure import _certify
from jop.poly import Polynomial, shift

INF = math.inf


def adaptive_simpson(f, a, b, tol, depth=60):
    """Plain recursive adaptive Simpson rule with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def half_gauss_sqrt_oracle(s):
    """integral_0^inf x^(s+1/2) exp(-x^2/2) dx via x = tan(u), then u = (pi/2) v^2.

    The second substitution removes the square-root cusp at the origin so that
    adaptive Simpson converges at its usual rate.
    """
    def g(v):
        u = 0.5 * math.pi * v * v
        if u >= 0.5 * math.pi:
            return 0.0
        x = math.tan(u)
        return x ** (s + 0.5) * math.exp(-0.5 * x * x) / math.cos(u) ** 2 * math.pi * v

    return adaptive_simpson(g, 0.0, 1.0, 1e-14)


# -- moments ---------------------------------------------------------------


def test_unit_interval_moments():
    mt = moments(IntervalMeasure(0, 1), 3)
    np.testing.assert_allclose(mt.moments, [1, 1 / 2, 1 / 3, 1 / 4], rtol=1e-14)
    assert mt.certified_rel_err <= 1e-12


def test_symmetric_interval():
    mt = moments(IntervalMeasure(-1, 1), 4)
    assert mt[0] == pytest.approx(2.0, rel=1e-14)
    assert abs(mt[1]) < 1e-15


@pytest.mark.parametrize("s", [0, 1, 3])
def test_half_gaussian_against_simpson_oracle(s):
    w = IntervalMeasure(0, INF, singular_factors=[(0.0, 0.5)], exp_gauss=True)
    mt = moments(w, 4)
    want = half_gauss_sqrt_oracle(s)
    assert mt[s] == pytest.approx(want, rel=1e-10)
    # and the oracle itself against the Gamma closed form 2^((s-1/2)/2) Gamma((s+3/2)/2)
    assert want == pytest.approx(2 ** ((s - 0.5) / 2) * math.gamma((s + 1.5) / 2), rel=1e-10)


@pytest.mark.parametrize("measure, f", [
    (IntervalMeasure(0, 1, singular_factors=[(0.0, -0.5), (1.0, 0.5)]),
     lambda x: x ** -0.5 * (1 - x) ** 0.5),
    (IntervalMeasure(1, 2, singular_factors=[(0.0, -0.5), (1.0, -0.5), (2.0, 0.5), (3.0, 0.25)]),
     lambda x: x ** -0.5 * (x - 1) ** -0.5 * (2 - x) ** 0.5 * (3 - x) ** 0.25),
    (IntervalMeasure(-1, 1, singular_factors=[(-1.0, -0.3), (1.0, 0.7)], exp_linear=0.8),
     lambda x: (1 + x) ** -0.3 * (1 - x) ** 0.7 * mpmath.exp(0.8 * x)),
    (IntervalMeasure(2, INF, exp_linear=-1.5, smooth_factor=Polynomial([1, 0, 1])),
     lambda x: mpmath.exp(-1.5 * x) * (1 + x * x)),
    (IntervalMeasure(-INF, -1, exp_linear=2.0, singular_factors=[(-1.0, -0.5)]),
     lambda x: mpmath.exp(2 * x) * (-1 - x) ** -0.5),
    (IntervalMeasure(-INF, INF, exp_gauss=True, exp_linear=0.3),
     lambda x: mpmath.exp(-x * x / 2 + 0.3 * x)),
])
def test_moments_against_mpmath(measure, f):
    mt = moments(measure, 8)
    mpmath.mp.dps = 30
    lo = mpmath.mpf(measure.lower) if math.isfinite(measure.lower) else -mpmath.inf
    hi = mpmath.mpf(measure.upper) if math.isfinite(measure.upper) else mpmath.inf
    for s in (0, 1, 4, 8):
        want = float(mpmath.quad(lambda x: x ** s * f(x), [lo, hi]))
        scale = float(mpmath.quad(lambda x: abs(x) ** s * f(x), [lo, hi]))
        assert abs(mt[s] - want) <= 1e-11 * scale, (s, mt[s], want)


def test_negative_half_line_sign_pattern():
    mt = moments(IntervalMeasure(-INF, -0.5, exp_linear=1.0), 7)
    assert np.all(np.sign(mt.moments) == (-1.0) ** np.arange(8))


def test_positive_support_moments_positive():
    mt = moments(IntervalMeasure(0.5, 3, singular_factors=[(0.5, -0.5)]), 12)
    assert np.all(mt.moments > 0)


@pytest.mark.parametrize("w, f", [
    (IntervalMeasure(0, 1, singular_factors=[(0.0, -0.5), (1.0, 0.5), (3.0, -0.5)]),
     lambda x: x ** -0.5 * (1 - x) ** 0.5 * (3 - x) ** -0.5),
    (IntervalMeasure(2, 3, singular_factors=[(0.0, -0.5), (2.0, 0.5), (3.0, -0.5)]),
     lambda x: x ** -0.5 * (x - 2) ** 0.5 * (3 - x) ** -0.5),
])
def test_certificate_bounds_halving_and_true_error(w, f):
    mt = moments(w, 10)
    bound = 10 * mt.certified_rel_err
    x, wt = w.quadrature(mt.order // 2, max_power=10)
    half = wt @ (x[:, None] ** np.arange(11))
    assert np.max(np.abs(half - mt.moments) / mt.abs_moments) < bound
    mpmath.mp.dps = 30
    exact = np.array([float(mpmath.quad(lambda x: x ** s * f(x), [w.lower, w.upper]))
                      for s in range(11)])
    assert np.max(np.abs(exact - mt.moments) / mt.abs_moments) < bound


def test_moments_are_cached():
    w = IntervalMeasure(0, 2)
    assert moments(w, 5) is moments(w, 5)


def test_certify_direct_call_matches_cache():
    w = IntervalMeasure(-3, -2, singular_factors=[(-2.0, 0.5)])
    np.testing.assert_allclose(_certify(w, 6).moments, moments(w, 6).moments, rtol=1e-13)


@pytest.mark.parametrize("kwargs", [
    dict(lower=1, upper=1),
    dict(lower=0, upper=1, singular_factors=[(0.0, -1.0)]),
    dict(lower=0, upper=1, singular_factors=[(0.5, 0.5)]),
    dict(lower=0, upper=INF),
    dict(lower=-INF, upper=0, exp_linear=-1.0),
    dict(lower=0, upper=2, smooth_factor=Polynomial([-1, 1])),
    dict(lower=0, upper=1, smooth_factor=Polynomial([-1])),
])
def test_invalid_measures(kwargs):
    with pytest.raises(NonIntegrable):
        IntervalMeasure(**kwargs)


def test_config_round_trip():
    block = {"interval": ["-inf", -1.0], "exponents": [[-1.0, 0.5]], "exp_linear": 2.0}
    w = IntervalMeasure.from_config(block)
    assert w.singular_factors == ((-1.0, -0.5),)
    assert w.lower == -INF
    assert IntervalMeasure.from_config(w.to_config()) == w


# -- inner products and Gram matrices -------------------------------------


def test_inner_product_examples():
    assert inner_product(moments(IntervalMeasure(0, 1), 4), Polynomial([1]), Polynomial([1])) \
        == pytest.approx(1.0)
    mt = moments(IntervalMeasure(-2, -1), 4)
    assert inner_product(mt, Polynomial([1]), Polynomial([0, 1])) == pytest.approx(-1.5, rel=1e-14)
    assert inner_product(mt, Polynomial(), Polynomial([1])) == 0.0


def test_inner_product_needs_moments():
    mt = moments(IntervalMeasure(0, 1), 3)
    with pytest.raises(InsufficientMoments):
        inner_product(mt, Polynomial([0, 0, 1]), Polynomial([0, 1, 1]))


coeffs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=5)


@given(coeffs, coeffs)
def test_inner_product_symmetric_and_shift(a, b):
    mt = moments(IntervalMeasure(-2, -1), 14)
    p, q = Polynomial(a), Polynomial(b)
    assert inner_product(mt, p, q) == inner_product(mt, q, p)
    assert inner_product(mt, shift(p, 1), q) == inner_product(mt, p, shift(q, 1))


def test_gram_examples():
    H = gram_matrix(moments(IntervalMeasure(0, 1), 6), 3, 3)
    np.testing.assert_allclose(H, [[1, 1 / 2, 1 / 3], [1 / 2, 1 / 3, 1 / 4], [1 / 3, 1 / 4, 1 / 5]],
                               rtol=1e-14)
    np.testing.assert_array_equal(H, H.T)
    G = gram_matrix(moments(IntervalMeasure(-2, -1), 4), 2, 2)
    np.testing.assert_allclose(G, [[1, -1.5], [-1.5, 7 / 3]], rtol=1e-14)
    R = gram_matrix(moments(IntervalMeasure(0, 1), 6), 2, 4)
    assert R.shape == (2, 4) and R[1, 3] == pytest.approx(1 / 5)
    with pytest.raises(InsufficientMoments):
        gram_matrix(moments(IntervalMeasure(0, 1), 3), 3, 3)


@pytest.mark.parametrize("w", [
    IntervalMeasure(0, 1),
    IntervalMeasure(-2, -1),
    IntervalMeasure(1, 2, singular_factors=[(1.0, -0.5), (2.0, 0.5)]),
    IntervalMeasure(0, INF, exp_linear=-1.0),
    IntervalMeasure(0, INF, singular_factors=[(0.0, 1.5)], exp_gauss=True),
])
def test_hankel_positive(w):
    assert hankel_is_positive(moments(w, 16))
