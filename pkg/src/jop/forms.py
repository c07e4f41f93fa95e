"""Determinantal bilinear forms on rank-one symmetric tensors.

For ``k`` inner products ``<.,.>_j`` the form on ``p^(k), q^(k)`` is the
determinant of the ``k x k`` matrix ``(<p, x^r q>_j)``; the ``j``-th deleted
form drops column ``j`` and the last row.  Symmetric tensors are never
expanded; everything acts on the univariate representatives ``p, q``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (IndexOutOfRange, InsufficientMoments, OverlappingIntervals,
                     UnsupportedDimension)
from .measure import IntervalMeasure, MomentTable, moments
from .poly import Polynomial


def moment_count(n_max: int, k: int) -> int:
    return 2 * (n_max + k) + 8


class InnerProductFamily:
    """``k`` weighted intervals, ordered left to right, with moment tables.

    Parameters
    ----------
    measures : sequence of IntervalMeasure
        Pairwise disjoint intervals, in any order; they are sorted here.
    n_max : int
        Largest polynomial degree the family must support.
    """

    def __init__(self, measures, n_max: int):
        measures = sorted(measures, key=lambda m: (m.lower, m.upper))
        if len(measures) < 2:
            raise UnsupportedDimension("an inner-product family needs k >= 2 intervals")
        for a, b in zip(measures, measures[1:]):
            if a.upper > b.lower:
                raise OverlappingIntervals(
                    f"intervals ({a.lower}, {a.upper}) and ({b.lower}, {b.upper}) overlap"
                )
        self.measures: tuple[IntervalMeasure, ...] = tuple(measures)
        self.n_max = int(n_max)
        count = moment_count(self.n_max, self.k)
        self.tables: tuple[MomentTable, ...] = tuple(moments(m, count) for m in measures)
        self._moments = np.stack([t.moments for t in self.tables])

        one = Polynomial([1.0])
        M = self.pairing_matrix(one, one, self.k)
        self.sign = 1.0 if np.linalg.det(M) > 0 else -1.0
        self.deleted_signs = tuple(
            1.0 if np.linalg.det(np.delete(M[:-1], j, axis=1)) > 0 else -1.0
            for j in range(self.k)
        )

    @property
    def k(self) -> int:
        return len(self.measures)

    @property
    def max_moment(self) -> int:
        return self._moments.shape[1] - 1

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return [(m.lower, m.upper) for m in self.measures]

    def pairing_matrix(self, p: Polynomial, q: Polynomial, rows: int) -> np.ndarray:
        """``M[r, j] = <p, x^r q>_j`` for ``r < rows`` and all ``k`` columns."""
        if p.is_zero() or q.is_zero():
            return np.zeros((rows, self.k))
        c = np.convolve(p.coeffs, q.coeffs)
        need = c.size - 1 + rows - 1
        if need > self.max_moment:
            raise InsufficientMoments(f"needs moment {need}, family has {self.max_moment}")
        idx = np.arange(rows)[:, None] + np.arange(c.size)[None, :]
        return (self._moments[:, idx] @ c).T

    def pairing(self, j: int, p: Polynomial, q: Polynomial, shift: int = 0) -> float:
        """``<p, x^shift q>_j`` with ``j`` counted from 1."""
        _check_index(j, self.k)
        return float(self.pairing_matrix(p, q, shift + 1)[shift, j - 1])

    def gram(self, j: int, rows: int, cols: int) -> np.ndarray:
        _check_index(j, self.k)
        if rows + cols - 2 > self.max_moment:
            raise InsufficientMoments(f"{rows}x{cols} Gram matrix exceeds moment table")
        idx = np.arange(rows)[:, None] + np.arange(cols)[None, :]
        return self._moments[j - 1][idx]

    def gram_norms(self, n: int) -> np.ndarray:
        """Spectral norms of the ``(n+k) x (n+1)`` Gram blocks; a magnitude scale for the forms."""
        cache = self.__dict__.setdefault("_gram_norms", {})
        if n not in cache:
            cache[n] = np.array([np.linalg.norm(self.gram(j, n + self.k, n + 1), 2)
                                 for j in range(1, self.k + 1)])
        return cache[n]

    def __repr__(self):
        return f"InnerProductFamily(k={self.k}, n_max={self.n_max}, intervals={self.intervals})"


def _check_index(j: int, k: int):
    if not 1 <= j <= k:
        raise IndexOutOfRange(f"index {j} outside 1..{k}")


def rank_one_form(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> float:
    """``<p^(k), q^(k)>`` as the determinant of ``(<p, x^(i-1) q>_j)``."""
    return fam.sign * float(np.linalg.det(fam.pairing_matrix(p, q, fam.k)))


def deleted_form(fam: InnerProductFamily, j: int, p: Polynomial, q: Polynomial) -> float:
    """``<p^(k-1), q^(k-1)>_(j)``: column ``j`` (1-based) and the last row removed."""
    _check_index(j, fam.k)
    M = fam.pairing_matrix(p, q, fam.k - 1)
    return fam.deleted_signs[j - 1] * float(np.linalg.det(np.delete(M, j - 1, axis=1)))


def deleted_forms(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> np.ndarray:
    """All ``k`` deleted forms at once."""
    M = fam.pairing_matrix(p, q, fam.k - 1)
    return np.array([
        fam.deleted_signs[j] * np.linalg.det(np.delete(M, j, axis=1)) for j in range(fam.k)
    ])


def rank_one_cosine(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> float:
    """Scale-free value ``|<p,q>| / sqrt(<p,p><q,q>)`` of the rank-one form."""
    den = math.sqrt(abs(rank_one_form(fam, p, p) * rank_one_form(fam, q, q)))
    return abs(rank_one_form(fam, p, q)) / den if den > 0 else 0.0


def deleted_cosines(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> np.ndarray:
    pq = deleted_forms(fam, p, q)
    den = np.sqrt(np.abs(deleted_forms(fam, p, p) * deleted_forms(fam, q, q)))
    return np.divide(np.abs(pq), den, out=np.zeros_like(pq), where=den > 0)


def _norm_product(p: Polynomial, q: Polynomial) -> float:
    return float(np.linalg.norm(p.coeffs) * np.linalg.norm(q.coeffs))


def scaled_rank_one(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> float:
    """``|<p,q>|`` divided by ``(|p| |q|)^k`` times the product of Gram norms."""
    if p.is_zero() or q.is_zero():
        return 0.0
    n = max(p.degree, q.degree)
    den = _norm_product(p, q) ** fam.k * np.prod(fam.gram_norms(n))
    return abs(rank_one_form(fam, p, q)) / den


def scaled_deleted(fam: InnerProductFamily, p: Polynomial, q: Polynomial) -> np.ndarray:
    """Deleted forms scaled like :func:`scaled_rank_one`, omitting the dropped column's norm."""
    if p.is_zero() or q.is_zero():
        return np.zeros(fam.k)
    n = max(p.degree, q.degree)
    g = fam.gram_norms(n)
    den = _norm_product(p, q) ** (fam.k - 1) * np.prod(g) / g
    return np.abs(deleted_forms(fam, p, q)) / den


def vandermonde_oracle(fam: InnerProductFamily, p: Polynomial, q: Polynomial,
                       deleted: int | None = None, order: int = 96) -> float:
    """Direct tensor-product quadrature of the Vandermonde-weighted integral.

    Test oracle for the determinant formulas; ``k <= 3`` only.
    """
    if fam.k > 3:
        raise UnsupportedDimension("the Vandermonde oracle is limited to k <= 3")
    idx = [j for j in range(fam.k) if deleted is None or j != deleted - 1]
    if deleted is not None:
        _check_index(deleted, fam.k)
    power = 2 * max(p.degree or 0, q.degree or 0) + fam.k
    grids = []
    for j in idx:
        x, w = fam.measures[j].quadrature(order, max_power=power)
        grids.append((x, w * p(x) * q(x)))
    if not grids:
        return 1.0
    total = 0.0
    if len(grids) == 1:
        return float(np.sum(grids[0][1]))
    if len(grids) == 2:
        (x1, f1), (x2, f2) = grids
        return float(f1 @ (x2[None, :] - x1[:, None]) @ f2)
    (x1, f1), (x2, f2), (x3, f3) = grids
    vdm = ((x2[None, :, None] - x1[:, None, None])
           * (x3[None, None, :] - x1[:, None, None])
           * (x3[None, None, :] - x2[None, :, None]))
    total = np.einsum("abc,a,b,c->", vdm, f1, f2, f3)
    return float(total)


@dataclass
class DefinitenessReport:
    trials: int
    degree: int
    min_rank_one: float
    min_abs_deleted: np.ndarray
    rank_one_positive: bool
    deleted_sign_consistent: bool
    zero_value: float = 0.0

    @property
    def ok(self) -> bool:
        return self.rank_one_positive and self.deleted_sign_consistent


def definiteness_check(fam: InnerProductFamily, trials: int = 200, degree: int = 6,
                       rng=None) -> DefinitenessReport:
    """Sample random nonzero ``p`` and evaluate the rank-one and deleted forms on ``(p, p)``."""
    rng = np.random.default_rng(rng)
    rank_vals, del_vals = [], []
    for _ in range(trials):
        d = int(rng.integers(0, degree + 1))
        c = rng.standard_normal(d + 1)
        c[-1] = c[-1] if c[-1] != 0 else 1.0
        p = Polynomial(c)
        rank_vals.append(rank_one_form(fam, p, p))
        del_vals.append(deleted_forms(fam, p, p))
    rank_vals = np.array(rank_vals)
    del_vals = np.array(del_vals)
    signs = np.sign(del_vals)
    return DefinitenessReport(
        trials=trials,
        degree=degree,
        min_rank_one=float(rank_vals.min()),
        min_abs_deleted=np.abs(del_vals).min(axis=0),
        rank_one_positive=bool(np.all(rank_vals > 0)),
        deleted_sign_consistent=bool(np.all(signs == signs[0]) and np.all(signs != 0)),
        zero_value=rank_one_form(fam, Polynomial(), Polynomial()),
    )


def compositions(n: int, k: int):
    """All ``k``-tuples of non-negative integers summing to ``n`` (stars and bars)."""
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        b = (-1,) + bars + (n + k - 1,)
        yield tuple(b[i + 1] - b[i] - 1 for i in range(k))
