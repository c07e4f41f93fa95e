"""Rank-one Gram-Schmidt: degree-by-degree construction and its certificates.

At degree ``n`` a monic ``v`` is accepted when the rank-one form of ``v``
against every member of the degree ``n-1`` system vanishes.  Candidates come
from :func:`jop.mep.solve`; the homogeneous equations are then an independent
check, and :func:`gs_refine` solves them by Gauss-Newton.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mep
from .errors import ConvergenceFailure, UnderdeterminedSystem
from .forms import InnerProductFamily, scaled_rank_one
from .poly import Polynomial, normalize

GS_TOL = 1e-8


@dataclass
class GSLedger:
    """Systems for degrees ``0..n_max`` and the residual matrix of each step."""

    systems: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def counts(self) -> tuple:
        return tuple(len(self.systems[n]) for n in sorted(self.systems))

    def max_residual(self, n: int) -> float:
        r = self.residuals.get(n)
        return float(np.max(r)) if r is not None and r.size else 0.0


def gs_residuals(fam: InnerProductFamily, candidates, previous) -> np.ndarray:
    """``R[c, a]`` = scaled |rank-one form(candidate c, previous member a)|."""
    prev = previous.polynomials if isinstance(previous, mep.JointSystem) else list(previous)
    R = np.zeros((len(candidates), len(prev)))
    for c, v in enumerate(candidates):
        for a, e in enumerate(prev):
            R[c, a] = scaled_rank_one(fam, v, e)
    return R


def _cofactor(M: np.ndarray) -> np.ndarray:
    k = M.shape[0]
    C = np.empty_like(M)
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * (np.linalg.det(minor) if minor.size else 1.0)
    return C


def gs_refine(fam: InnerProductFamily, candidate: Polynomial, previous, *,
              max_iter: int = 30, tol: float = 1e-13, full_output: bool = False):
    """Gauss-Newton on ``det(<v, x^r E_a>_j) = 0`` for all previous ``E_a``, ``v`` monic.

    Returns the refined monic polynomial, or ``(poly, iterations, residual)``
    when ``full_output`` is set.
    """
    prev = previous.polynomials if isinstance(previous, mep.JointSystem) else list(previous)
    v = normalize(candidate)
    n = v.degree
    if len(prev) + 1 < n + 1:
        raise UnderdeterminedSystem(
            f"{len(prev)} equations plus normalization for {n + 1} unknowns")
    k = fam.k
    basis = [Polynomial.monomial(s) for s in range(n + 1)]
    # M_s[a] is the pairing matrix of x^s against E_a; det(sum c_s M_s) is the equation
    blocks = [np.stack([fam.pairing_matrix(b, e, k) for b in basis]) for e in prev]
    g = fam.gram_norms(n)
    weights = [1.0 / (np.linalg.norm(e.coeffs) ** k * np.prod(g)) for e in prev]

    def system(c):
        F = np.empty(len(prev) + 1)
        J = np.zeros((len(prev) + 1, n + 1))
        for a, (Ms, w) in enumerate(zip(blocks, weights)):
            M = np.tensordot(c, Ms, axes=1)
            F[a] = w * np.linalg.det(M)
            C = _cofactor(M)
            J[a] = w * np.einsum("ij,sij->s", C, Ms)
        F[-1] = c[-1] - 1.0
        J[-1, -1] = 1.0
        return F, J

    c = v.coeffs
    it = 0
    F, J = system(c)
    for it in range(1, max_iter + 1):
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        c = c + step
        F, J = system(c)
        if np.linalg.norm(step) <= tol * np.linalg.norm(c):
            break
    res = float(np.max(np.abs(F[:-1]) * np.linalg.norm(c) ** -k)) if len(prev) else 0.0
    if not np.all(np.isfinite(c)) or res > GS_TOL:
        raise ConvergenceFailure(f"rank-one Gram-Schmidt refinement stalled at {res:.2e}")
    out = normalize(Polynomial(c))
    return (out, it, res) if full_output else out


def gs_drive(fam: InnerProductFamily, n_max: int, *, seed=0, tol: float = GS_TOL) -> GSLedger:
    """Build degrees ``0..n_max`` and certify each against the previous degree."""
    ledger = GSLedger()
    for n in range(n_max + 1):
        system = mep.solve(fam, n, seed=seed)
        if n == 0:
            ledger.systems[0] = system
            ledger.residuals[0] = np.zeros((1, 0))
            continue
        previous = ledger.systems[n - 1]
        R = gs_residuals(fam, system.polynomials, previous)
        for c in np.flatnonzero(R.max(axis=1) > tol):
            refined = gs_refine(fam, system.pairs[c].vector, previous)
            system.pairs[c].vector = refined
            R[c] = gs_residuals(fam, [refined], previous)[0]
        ledger.systems[n] = system
        ledger.residuals[n] = R
    return ledger


@dataclass
class ToyReport:
    epsilon: float
    lam: float
    gram: np.ndarray
    vectors: list
    count: int
    inner_product: float | None
    criterion: float

    @property
    def orthogonal(self) -> bool:
        return self.count == 2 and abs(self.inner_product) < 1e-12


def toy_example(epsilon: float, lam: float) -> ToyReport:
    """Rank-one vectors orthogonal to ``e_3`` in a three-dimensional model space.

    Basis ``e_1 = x1 x2``, ``e_2 = x1 + x2``, ``e_3 = 1``; the rank-one tensor
    of ``a x + b`` has coordinates ``(a^2, a b, b^2)``.  With ``r = b / a`` the
    condition ``<p (x) p, e_3> = 0`` is a quadratic in ``r``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    e2 = epsilon ** 2
    G = np.array([[1.0, 0.0, -e2], [0.0, lam, 0.0], [-e2, 0.0, 1.0]])
    # G13 + G23 r + G33 r^2 = 0
    disc = G[1, 2] ** 2 - 4 * G[2, 2] * G[0, 2]
    if disc < 0:
        rs = []
    else:
        h = math.sqrt(disc) / (2 * G[2, 2])
        mid = -G[1, 2] / (2 * G[2, 2])
        rs = [mid + h] if h == 0 else [mid + h, mid - h]
    vectors = [np.array([1.0, r, r * r]) for r in rs]
    ip = float(vectors[0] @ G @ vectors[1]) if len(vectors) == 2 else None
    return ToyReport(epsilon, lam, G, vectors, len(vectors), ip, 1 - epsilon ** 4 - lam * e2)
