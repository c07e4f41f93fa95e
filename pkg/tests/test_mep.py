import cmath
import itertools
import math

import numpy as np
import pytest

from conftest import family
from jop import mep
from jop.errors import CholeskyFailure, DegenerateVector, DuplicateRoots, IncompleteSystem, NotK2
from jop.forms import InnerProductFamily, compositions, deleted_form, deleted_forms, rank_one_form
from jop.measure import IntervalMeasure, inner_product
from jop.poly import Polynomial, from_roots, real_roots


def roots_of_quadratic(a, b, c):
    d = math.sqrt(b * b - 4 * a * c)
    return sorted([(-b - d) / (2 * a), (-b + d) / (2 * a)])


# -- build --------------------------------------------------------------------


def test_build_example(unit_pair):
    prob = mep.build(unit_pair, 1)
    np.testing.assert_allclose(prob.A[0], [[1, -1.5], [-1.5, 7 / 3]], rtol=1e-14)
    np.testing.assert_allclose(prob.A[1], [[1, 1.5], [1.5, 7 / 3]], rtol=1e-14)


@pytest.mark.parametrize("k, n", [(2, 0), (2, 3), (3, 2), (4, 2), (5, 1)])
def test_build_shape_and_hankel(k, n):
    prob = mep.build(family(k, 4), n)
    assert all(a.shape == (n + k - 1, n + 1) for a in prob.A)
    assert prob.A[0].shape[0] - prob.A[0].shape[1] == k - 2
    assert prob.is_hankel()
    assert prob.family is not None


def test_rectmep_validates_shapes():
    with pytest.raises(ValueError):
        mep.RectMEP(2, 1, (np.eye(2),))
    with pytest.raises(ValueError):
        mep.RectMEP(2, 1, (np.eye(2), np.eye(3)))


# -- k = 2 pencil ---------------------------------------------------------------


def test_solve_k2_against_dense_pencil(unit_pair):
    prob = mep.build(unit_pair, 1)
    system = mep.solve_k2(prob)
    assert len(system) == 2
    A1, A2 = prob.A
    # det(A1 - mu A2) = 0 written out for 2 x 2 matrices
    a = A2[0, 0] * A2[1, 1] - A2[0, 1] ** 2
    b = -(A1[0, 0] * A2[1, 1] + A1[1, 1] * A2[0, 0] - 2 * A1[0, 1] * A2[0, 1])
    c = A1[0, 0] * A1[1, 1] - A1[0, 1] ** 2
    want = roots_of_quadratic(a, b, c)
    got = sorted(-p.lam[1] / p.lam[0] for p in system)
    np.testing.assert_allclose(got, want, rtol=1e-12)
    for p in system:
        assert p.residual < 1e-12
    E1, E2 = system.polynomials
    for t in unit_pair.tables:
        scale = math.sqrt(inner_product(t, E1, E1) * inner_product(t, E2, E2))
        assert abs(inner_product(t, E1, E2)) < 1e-12 * scale


def test_solve_k2_degree_zero(unit_pair):
    system = mep.solve_k2(mep.build(unit_pair, 0))
    assert len(system) == 1
    assert system.polynomials[0] == Polynomial([1.0])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_solve_k2_reflection_symmetry(unit_pair, n):
    # x -> -x swaps the two inner products: E(x) maps to the member E(-x), lambda reversed
    system = mep.solve_k2(mep.build(unit_pair, n))
    flip = (-1.0) ** np.arange(n + 1) * (-1.0) ** n
    for p in system:
        image = p.vector.padded(n + 1) * flip
        gaps = [np.max(np.abs(image - q.vector.padded(n + 1))) for q in system]
        match = system.pairs[int(np.argmin(gaps))]
        assert min(gaps) < 1e-10 * np.max(np.abs(image))
        assert mep.ray_angle(match.lam, p.lam[::-1]) < 1e-10


def test_solve_k2_errors(three_intervals):
    with pytest.raises(NotK2):
        mep.solve_k2(mep.build(three_intervals, 1))
    bad = mep.RectMEP(2, 1, (np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]])))
    with pytest.raises(CholeskyFailure):
        mep.solve_k2(bad)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_newton_agrees_with_pencil_for_k2(unit_pair, n):
    a = mep.solve(unit_pair, n, method="pencil")
    b = mep.solve(unit_pair, n, method="newton", seed=3)
    assert len(a) == len(b) == n + 1
    for p in a:
        gaps = [np.max(np.abs(p.vector.padded(n + 1) - q.vector.padded(n + 1))) for q in b]
        assert min(gaps) < 1e-8
        assert min(mep.ray_angle(p.lam, q.lam) for q in b) < 1e-8


# -- Newton path -----------------------------------------------------------------


def test_newton_heine_stieltjes_degree_one(three_intervals):
    prob = mep.build(three_intervals, 1)
    seeds = [mep.seed_from_distribution(three_intervals, 1, c) for c in compositions(1, 3)]
    system = mep.solve_newton(prob, seeds, rng=0)
    assert len(system) == 3
    assert sorted(p.signature for p in system) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert system.min_angle > 1e-3


@pytest.mark.parametrize("n, k, choice", [(1, 2, (0,)), (2, 3, (1, 3)), (1, 3, (1, 2))])
def test_exact_closed_form_seed_is_a_fixed_point(n, k, choice):
    pair = mep.roots_of_unity_pair(n, k, choice)
    assert not pair.is_complex
    prob = mep.roots_of_unity_template(n, k)
    try:
        system = mep.solve_newton(prob, [(pair.vector, pair.lam)], rng=1)
    except IncompleteSystem as exc:
        system = exc.system
    assert len(system) == 1
    got = system.pairs[0]
    assert got.iterations <= 2
    assert mep.ray_angle(got.lam, pair.lam) < 1e-10
    assert mep.ray_angle(got.vector.padded(n + 1), pair.vector) < 1e-10


def test_incomplete_system_is_reported(three_intervals):
    prob = mep.build(three_intervals, 2)
    seed = mep.seed_from_distribution(three_intervals, 2, (2, 0, 0))
    with pytest.raises(IncompleteSystem) as info:
        mep.solve_newton(prob, [seed], rng=0)
    assert info.value.expected == 6
    assert len(info.value.system) == info.value.found == 1


# -- seeds and the eigenvalue formula ------------------------------------------


def test_seed_examples(three_intervals):
    v, lam = mep.seed_from_distribution(three_intervals, 1, (1, 0, 0))
    assert v == Polynomial([-0.5, 1.0])
    np.testing.assert_allclose(lam, mep.eigenvalue_formula(three_intervals, v))
    v, _ = mep.seed_from_distribution(three_intervals, 0, (0, 0, 0))
    assert v == Polynomial([1.0])
    v, _ = mep.seed_from_distribution(three_intervals, 3, (0, 2, 1))
    np.testing.assert_allclose(sorted(real_roots(v)), [4 / 3, 5 / 3, 2.5], atol=1e-12)
    with pytest.raises(ValueError):
        mep.seed_from_distribution(three_intervals, 2, (1, 0, 0))


@pytest.mark.parametrize("n, k", [(3, 2), (2, 3), (3, 3), (2, 4)])
def test_seed_enumeration_count(n, k):
    fam = family(k, 4)
    seeds = [mep.seed_from_distribution(fam, n, c) for c in compositions(n, k)]
    assert len(seeds) == math.comb(n + k - 1, k - 1)
    assert len({tuple(np.round(v.coeffs, 12)) for v, _ in seeds}) == len(seeds)


def test_unbounded_seed_windows():
    fam = InnerProductFamily([IntervalMeasure(-math.inf, -1, exp_linear=1.0),
                              IntervalMeasure(0, math.inf, exp_linear=-1.0)], 3)
    v, _ = mep.seed_from_distribution(fam, 2, (1, 1))
    np.testing.assert_allclose(sorted(real_roots(v)), [-2.5, 1.5], atol=1e-12)


def test_eigenvalue_formula_k2(unit_pair):
    v = Polynomial([0.3, -1, 1])
    want = np.array([inner_product(unit_pair.tables[1], v, v),
                     -inner_product(unit_pair.tables[0], v, v)])
    assert mep.ray_angle(mep.eigenvalue_formula(unit_pair, v), want) < 1e-14
    assert np.all(mep.eigenvalue_formula(unit_pair, v) != 0)
    with pytest.raises(DegenerateVector):
        mep.eigenvalue_formula(unit_pair, Polynomial())


def test_normalize_lambda():
    np.testing.assert_allclose(mep.normalize_lambda([0, -3, 4]), [0, 0.6, -0.8])
    with pytest.raises(DegenerateVector):
        mep.normalize_lambda([0, 0])
    assert mep.ray_angle([1, 1], [-2, -2]) == pytest.approx(0, abs=1e-15)
    assert mep.ray_angle([1, 0], [0, 1]) == pytest.approx(math.pi / 2)


# -- invariants over the solved systems ------------------------------------------

CASES = [(n, 2) for n in range(5)] + [(n, 3) for n in range(4)] + [(n, 4) for n in range(3)]


@pytest.fixture(scope="module")
def solved():
    out = {}
    for n, k in CASES:
        fam = family(k, 4, gap=0.25)
        out[n, k] = (fam, mep.solve(fam, n, seed=0))
    return out


@pytest.mark.parametrize("n, k", CASES)
def test_count_realness_formula_orthogonality(solved, n, k):
    fam, system = solved[n, k]
    assert len(system) == math.comb(n + k - 1, k - 1)
    assert system.min_angle > 1e-6
    assert system.max_residual <= 1e-9
    assert system.max_orthogonality < 1e-8
    for p in system:
        assert np.isrealobj(p.lam) and np.isrealobj(p.vector.coeffs)
        assert mep.ray_angle(p.lam, mep.eigenvalue_formula(fam, p.vector)) < 1e-8
        assert np.all(np.abs(p.lam) > 0)
        assert abs(np.linalg.norm(p.lam) - 1) < 1e-14
        assert p.vector.degree == n and p.vector.leading == 1.0
    assert sorted(p.signature for p in system) == sorted(compositions(n, k))


def test_canonical_order_is_deterministic(three_intervals):
    a = mep.solve(three_intervals, 2, seed=0)
    b = mep.solve(three_intervals, 2, seed=11)
    assert [p.signature for p in a] == [p.signature for p in b]
    for p, q in zip(a, b):
        np.testing.assert_allclose(p.vector.coeffs, q.vector.coeffs, atol=1e-9)


# -- closed-form template family --------------------------------------------------


def test_roots_of_unity_template_n1_k2():
    prob = mep.roots_of_unity_template(1, 2)
    lam = np.array([0.7, -0.2])
    np.testing.assert_array_equal(prob.pencil(lam), [[0.7, -0.2], [-0.2, 0.7]])
    for a in prob.A:
        assert set(np.unique(a)) <= {0.0, 1.0}


def test_roots_of_unity_template_rows_follow_recursion():
    n, k = 3, 3
    prob = mep.roots_of_unity_template(n, k)
    lam = np.array([2.0, 3.0, 5.0])
    v = np.array([1.0, 10.0, 100.0, 1000.0])
    out = prob.pencil(lam) @ v
    # row j is sum_i lam_i v_(j+1-i), with v_n wrapping into the first row via lam_k
    want = [lam[0] * v[0] + lam[2] * v[3],
            lam[0] * v[1] + lam[1] * v[0],
            lam[0] * v[2] + lam[1] * v[1] + lam[2] * v[0],
            lam[0] * v[3] + lam[1] * v[2] + lam[2] * v[1],
            lam[1] * v[3] + lam[2] * v[2]]
    np.testing.assert_allclose(out, want)


def test_closed_form_examples():
    p = mep.roots_of_unity_pair(1, 2, (0,))
    assert mep.ray_angle(p.lam, [1, -1]) < 1e-15
    assert mep.ray_angle(p.vector, [1, 1]) < 1e-15
    np.testing.assert_allclose(np.array([[1, -1], [-1, 1]]) @ np.array([1, 1]), 0)
    q = mep.roots_of_unity_pair(1, 2, (1,))
    assert mep.ray_angle(q.lam, [1, 1]) < 1e-15
    assert mep.ray_angle(q.vector, [-1, 1]) < 1e-15
    with pytest.raises(DuplicateRoots):
        mep.roots_of_unity_pair(3, 3, (1, 1))


@pytest.mark.parametrize("n, k", [(0, 2), (1, 2), (4, 2), (1, 3), (3, 3), (2, 4), (3, 5)])
def test_closed_form_family(n, k):
    pairs = mep.roots_of_unity_pairs(n, k)
    assert len(pairs) == math.comb(n + k - 1, k - 1)
    for _, p in pairs:
        assert p.residual < 1e-12
    for (_, a), (_, b) in itertools.combinations(pairs, 2):
        assert mep.ray_angle(a.lam, b.lam) > 1e-6


@pytest.mark.parametrize("n", [1, 2, 5])
def test_closed_form_k2_is_fourier(n):
    for (r,), p in mep.roots_of_unity_pairs(n, 2):
        zeta = cmath.exp(2j * math.pi * r / (n + 1))
        fourier = np.array([zeta ** j for j in range(n + 1)])
        assert mep.ray_angle(p.vector, fourier) < 1e-12


def test_closed_form_realification():
    closed = mep.roots_of_unity_pair(3, 3, (1, 4))
    assert not closed.is_complex and np.isrealobj(closed.vector) and np.isrealobj(closed.lam)
    assert closed.residual < 1e-12
    open_ = mep.roots_of_unity_pair(3, 3, (0, 1))
    assert open_.is_complex and np.iscomplexobj(open_.lam)
    assert open_.residual < 1e-12


# -- M-matrix minors ---------------------------------------------------------------


def test_minors_vanish_for_distinct_members(three_intervals):
    system = mep.solve(three_intervals, 2, seed=0)
    prob = mep.build(three_intervals, 2)
    g = three_intervals.gram_norms(2)
    for u, v in itertools.combinations(system.polynomials, 2):
        M, minors = mep.m_matrix_minors(prob, three_intervals, u, v)
        assert M.shape == (3, 3)
        scale = (np.linalg.norm(u.coeffs) * np.linalg.norm(v.coeffs)) ** 2 * np.prod(g) / g
        assert np.max(np.abs(minors) / scale) < 1e-8
        # the full determinant is the rank-one form, which need not vanish
        assert np.linalg.det(M) == pytest.approx(rank_one_form(three_intervals, u, v), rel=1e-9,
                                                 abs=1e-12)


def test_minors_on_the_diagonal(three_intervals):
    u = Polynomial([0.2, -1.0, 1.0])
    _, minors = mep.m_matrix_minors(mep.build(three_intervals, 2), three_intervals, u, u)
    np.testing.assert_allclose(np.abs(minors), np.abs(deleted_forms(three_intervals, u, u)),
                               rtol=1e-12)
    assert np.all(np.abs(minors) > 0)


def test_minors_k2(unit_pair):
    u, v = Polynomial([1, 2]), Polynomial([-1, 0, 1])
    _, minors = mep.m_matrix_minors(mep.build(unit_pair, 2), unit_pair, u, v)
    for j in (1, 2):
        assert abs(minors[j - 1]) == pytest.approx(abs(deleted_form(unit_pair, j, u, v)), rel=1e-13)
    with pytest.raises(ValueError):
        mep.m_matrix_minors(mep.build(unit_pair, 1), unit_pair, from_roots([0, 1, 2]), v)
