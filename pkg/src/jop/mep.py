"""Symmetric rectangular multiparameter eigenvalue problems.

The problem is ``sum_j lam_j A_j v = 0`` with ``k`` matrices of shape
``(n+k-1) x (n+1)``.  For an inner-product family ``A_j[i, s] = m_j(i+s)``,
and the eigenvectors ``v`` (as polynomials of degree ``n``) form the jointly
orthogonal system of degree ``n``.

Two solvers are provided: a Cholesky-reduced generalized symmetric
eigenproblem for ``k = 2`` and a deflated Newton iteration on the square
augmented system for any ``k``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (CholeskyFailure, DegenerateVector, DuplicateRoots,
                     IncompleteSystem, InsufficientMoments, NotK2)
from .forms import InnerProductFamily, compositions, deleted_forms, scaled_deleted
from .poly import Polynomial, from_roots, normalize, roots

log = logging.getLogger(__name__)

TAU_DUP = 1e-6
ACCEPT_RESIDUAL = 1e-9
NEWTON_TOL = 1e-11
MAX_NEWTON = 50
SEED_WINDOW = 3.0


# -- data types ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RectMEP:
    """``k`` matrices of shape ``(n+k-1) x (n+1)`` plus a provenance tag."""

    k: int
    n: int
    A: tuple
    source: object = "custom"

    def __post_init__(self):
        mats = tuple(np.array(a, dtype=float) for a in self.A)
        if len(mats) != self.k:
            raise ValueError(f"expected {self.k} matrices, got {len(mats)}")
        shape = (self.n + self.k - 1, self.n + 1)
        for a in mats:
            if a.shape != shape:
                raise ValueError(f"matrix shape {a.shape} != {shape}")
            a.setflags(write=False)
        object.__setattr__(self, "A", mats)

    @property
    def family(self) -> InnerProductFamily | None:
        return self.source if isinstance(self.source, InnerProductFamily) else None

    @property
    def scale(self) -> float:
        return max(np.linalg.norm(a, 2) for a in self.A)

    def pencil(self, lam) -> np.ndarray:
        return sum(l * a for l, a in zip(lam, self.A))

    def residual(self, v, lam) -> float:
        """``||sum lam_j A_j v|| / (||v|| max_j ||A_j||)`` with ``lam`` at unit length."""
        v = v.padded(self.n + 1) if isinstance(v, Polynomial) else np.asarray(v)
        lam = np.asarray(lam)
        nv = np.linalg.norm(v)
        if nv == 0:
            return math.inf
        return float(np.linalg.norm(self.pencil(lam / np.linalg.norm(lam)) @ v) / (nv * self.scale))

    def is_hankel(self) -> bool:
        for a in self.A:
            r, c = a.shape
            for d in range(r + c - 1):
                vals = [a[i, d - i] for i in range(max(0, d - c + 1), min(r, d + 1))]
                if np.ptp(vals) > 1e-14 * max(1.0, np.max(np.abs(vals))):
                    return False
        return True

    def symmetrized(self) -> "RectMEP":
        """Same problem with the column order reversed."""
        return RectMEP(self.k, self.n, tuple(a[:, ::-1] for a in self.A), self.source)


@dataclass
class Eigenpair:
    vector: Polynomial | np.ndarray
    lam: np.ndarray
    residual: float
    iterations: int = 0
    signature: tuple | None = None
    spectral: float | None = None
    is_complex: bool = False


@dataclass
class JointSystem:
    """Eigenpairs of one degree together with their certificates."""

    k: int
    n: int
    pairs: list
    min_angle: float
    orthogonality: dict = field(default_factory=dict)
    family: InnerProductFamily | None = field(default=None, repr=False)

    @property
    def expected_count(self) -> int:
        return math.comb(self.n + self.k - 1, self.k - 1)

    @property
    def polynomials(self) -> list[Polynomial]:
        return [p.vector for p in self.pairs]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.pairs), default=0.0)

    @property
    def max_orthogonality(self) -> float:
        return max((float(np.max(m)) for m in self.orthogonality.values() if m.size), default=0.0)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


# -- helpers ------------------------------------------------------------------

def normalize_lambda(lam) -> np.ndarray:
    """Unit length, first nonzero component real and positive."""
    lam = np.asarray(lam)
    nrm = np.linalg.norm(lam)
    if nrm == 0:
        raise DegenerateVector("zero eigenvalue vector")
    lam = lam / nrm
    tol = 1e-14
    first = next(x for x in lam if abs(x) > tol)
    phase = first / abs(first)
    lam = lam / phase
    if np.iscomplexobj(lam) and np.max(np.abs(lam.imag)) < 1e-14:
        lam = lam.real
    return lam


def ray_angle(a, b) -> float:
    """Angle between the lines spanned by ``a`` and ``b`` (real or complex)."""
    a = np.asarray(a)
    b = np.asarray(b)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    ip = np.vdot(b, a)
    phase = ip / abs(ip) if abs(ip) > 0 else 1.0
    d = np.linalg.norm(a - phase * b)
    return float(2.0 * math.asin(min(1.0, d / 2.0)))


def signature(p: Polynomial, intervals) -> tuple:
    """Number of real roots of ``p`` strictly inside each interval."""
    if p.degree is None or p.degree == 0:
        return tuple(0 for _ in intervals)
    counts = [0] * len(intervals)
    for re, im, mult in roots(p):
        if im != 0.0:
            continue
        for j, (lo, hi) in enumerate(intervals):
            if lo < re < hi:
                counts[j] += mult
    return tuple(counts)


def canonical_key(pair: Eigenpair):
    sig = pair.signature if pair.signature is not None else ()
    vec = pair.vector.coeffs if isinstance(pair.vector, Polynomial) else np.real(pair.vector)
    return (tuple(-s for s in sig), tuple(np.round(vec, 12)))


def assemble(mep: RectMEP, pairs: list, family: InnerProductFamily | None) -> JointSystem:
    """Sort pairs canonically and attach distinctness and orthogonality certificates."""
    if family is not None:
        for p in pairs:
            p.signature = signature(p.vector, family.intervals)
    pairs = sorted(pairs, key=canonical_key)
    angles = [ray_angle(a.lam, b.lam) for a, b in itertools.combinations(pairs, 2)]
    system = JointSystem(mep.k, mep.n, pairs, min(angles) if angles else math.pi / 2,
                         family=family)
    if family is not None:
        system.orthogonality = orthogonality_matrices(family, system.polynomials)
    return system


def orthogonality_matrices(fam: InnerProductFamily, polys) -> dict:
    """Per deleted form ``j``: matrix of scaled |form(E_a, E_b)|, zero diagonal."""
    N = len(polys)
    out = {j: np.zeros((N, N)) for j in range(1, fam.k + 1)}
    for a in range(N):
        for b in range(a + 1, N):
            cos = scaled_deleted(fam, polys[a], polys[b])
            for j in range(fam.k):
                out[j + 1][a, b] = out[j + 1][b, a] = cos[j]
    return out


# -- building -----------------------------------------------------------------

def build(fam: InnerProductFamily, n: int) -> RectMEP:
    """``A_j[i, s] = m_j(i + s)`` for ``i <= n+k-2`` and ``s <= n``."""
    k = fam.k
    if 2 * n + k - 2 > fam.max_moment:
        raise InsufficientMoments(f"degree {n} needs moments up to {2 * n + k - 2}")
    A = tuple(fam.gram(j, n + k - 1, n + 1) for j in range(1, k + 1))
    return RectMEP(k, n, A, fam)


def eigenvalue_formula(fam: InnerProductFamily, v: Polynomial) -> np.ndarray:
    """``((-1)^(j-1) <v^(k-1), v^(k-1)>_(j))_j``, normalized."""
    if v.is_zero():
        raise DegenerateVector("the zero vector has no eigenvalue")
    d = deleted_forms(fam, v, v)
    lam = d * (-1.0) ** np.arange(fam.k)
    if not np.any(lam):
        raise DegenerateVector("all deleted forms vanish; the family is not definite")
    return normalize_lambda(lam)


def _seed_window(lo: float, hi: float) -> tuple[float, float]:
    if math.isfinite(lo) and math.isfinite(hi):
        return lo, hi
    if math.isfinite(lo):
        return lo, lo + SEED_WINDOW
    if math.isfinite(hi):
        return hi - SEED_WINDOW, hi
    return -2.0, 2.0


def seed_from_distribution(fam: InnerProductFamily, n: int, counts) -> tuple[Polynomial, np.ndarray]:
    """Monic seed with ``counts[j]`` equispaced roots in interval ``j``."""
    counts = tuple(int(c) for c in counts)
    if sum(counts) != n or len(counts) != fam.k:
        raise ValueError(f"counts {counts} is not a {fam.k}-composition of {n}")
    rts = []
    for (lo, hi), c in zip(fam.intervals, counts):
        a, b = _seed_window(lo, hi)
        rts.extend(a + (b - a) * (i + 1) / (c + 1) for i in range(c))
    v = from_roots(rts)
    return v, eigenvalue_formula(fam, v)


def _random_seed(fam: InnerProductFamily, n: int, counts, rng) -> tuple[Polynomial, np.ndarray]:
    rts = []
    for (lo, hi), c in zip(fam.intervals, counts):
        a, b = _seed_window(lo, hi)
        rts.extend(rng.uniform(a, b, c))
    v = from_roots(rts)
    return v, eigenvalue_formula(fam, v)


# -- k = 2 pencil ---------------------------------------------------------------

def solve_k2(mep: RectMEP) -> JointSystem:
    """Generalized symmetric eigenproblem ``A_1 v = mu A_2 v`` via Cholesky of ``A_2``.

    Each eigenvalue ``mu`` gives ``lam ~ (1, -mu)``.
    """
    if mep.k != 2:
        raise NotK2(f"solve_k2 needs k = 2, got k = {mep.k}")
    A1, A2 = mep.A
    try:
        mu, V = scipy.linalg.eigh(A1, A2)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure("second Gram matrix is not positive definite") from exc
    pairs = []
    for i in range(mu.size):
        vec, m = _inverse_iteration(A1, A2, V[:, i], mu[i])
        v = normalize(Polynomial(vec)) if vec[-1] != 0 else Polynomial(vec)
        lam = normalize_lambda(np.array([1.0, -m]))
        pairs.append(Eigenpair(v, lam, mep.residual(v, lam)))
    return assemble(mep, pairs, mep.family)


def _inverse_iteration(A1, A2, v, mu, steps: int = 2):
    """Fixed-shift inverse iteration plus a Rayleigh update; backward stable polish."""
    best = (np.linalg.norm((A1 - mu * A2) @ v) / np.linalg.norm(v), v, mu)
    for _ in range(steps):
        try:
            w = np.linalg.solve(A1 - mu * A2, A2 @ v)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(w)) or not np.any(w):
            break
        v = w / np.linalg.norm(w)
        mu = float(v @ A1 @ v) / float(v @ A2 @ v)
        r = np.linalg.norm((A1 - mu * A2) @ v)
        if r < best[0]:
            best = (r, v, mu)
    return best[1], best[2]


# -- Newton path ----------------------------------------------------------------

class _NewtonProblem:
    """Equilibrated augmented system ``[M(lam) w; c_w.w - 1; c_l.lam - 1]``."""

    def __init__(self, mep: RectMEP, rng):
        self.mep = mep
        S = sum(np.abs(a) for a in mep.A)
        row = 1.0 / np.maximum(S.max(axis=1), 1e-300)
        col = 1.0 / np.maximum((S * row[:, None]).max(axis=0), 1e-300)
        self.col = col
        self.B = [a * row[:, None] * col[None, :] for a in mep.A]
        self.nv = mep.n + 1
        self.k = mep.k
        self.cw = rng.standard_normal(self.nv)
        self.cl = rng.standard_normal(self.k)

    def chart(self, v: np.ndarray, lam: np.ndarray) -> np.ndarray | None:
        w = v / self.col
        sw, sl = self.cw @ w, self.cl @ lam
        if abs(sw) < 1e-10 * np.linalg.norm(w) or abs(sl) < 1e-10 * np.linalg.norm(lam):
            return None
        return np.concatenate([w / sw, lam / sl])

    def unpack(self, z):
        return z[: self.nv] * self.col, z[self.nv:]

    def FJ(self, z):
        w, lam = z[: self.nv], z[self.nv:]
        M = sum(l * b for l, b in zip(lam, self.B))
        rows = M.shape[0]
        F = np.concatenate([M @ w, [self.cw @ w - 1.0, self.cl @ lam - 1.0]])
        J = np.zeros((F.size, z.size))
        J[:rows, : self.nv] = M
        for j, b in enumerate(self.B):
            J[:rows, self.nv + j] = b @ w
        J[rows, : self.nv] = self.cw
        J[rows + 1, self.nv:] = self.cl
        return F, J


def _deflation(z, found, power=2.0, shift=1.0):
    eta, grad = 1.0, np.zeros_like(z)
    for w in found:
        d = z - w
        nd = float(d @ d)
        if nd == 0:
            return math.inf, grad
        f = nd ** (-power / 2) + shift
        g = -power * d * nd ** (-power / 2 - 1)
        grad = grad * f + eta * g
        eta *= f
    return eta, grad


def _newton(prob: _NewtonProblem, z, found, max_iter, tol):
    """Damped, deflated Newton; returns ``(z, |F|, iterations)``."""
    def merit(z):
        F, _ = prob.FJ(z)
        eta, _ = _deflation(z, found)
        return eta * np.linalg.norm(F)

    it = 0
    for it in range(max_iter + 1):
        F, J = prob.FJ(z)
        if np.linalg.norm(F) <= tol:
            break
        if it == max_iter:
            break
        eta, grad = _deflation(z, found)
        if not math.isfinite(eta):
            return z, math.inf, it
        G = eta * F
        JG = eta * J + np.outer(F, grad)
        try:
            dz = np.linalg.solve(JG, -G)
        except np.linalg.LinAlgError:
            return z, math.inf, it
        if not np.all(np.isfinite(dz)):
            return z, math.inf, it
        m0 = np.linalg.norm(G)
        step = 1.0
        for _ in range(6):
            if merit(z + step * dz) <= m0:
                break
            step *= 0.5
        z = z + step * dz
    F, _ = prob.FJ(z)
    # polish without deflation
    for _ in range(2):
        Fz, J = prob.FJ(z)
        try:
            dz = np.linalg.solve(J, -Fz)
        except np.linalg.LinAlgError:
            break
        if np.linalg.norm(prob.FJ(z + dz)[0]) < np.linalg.norm(Fz):
            z = z + dz
    return z, float(np.linalg.norm(prob.FJ(z)[0])), it


def solve_newton(mep: RectMEP, seeds, *, rng=0, extra_seeds=None, max_attempts=None,
                 deflate=True, max_iter=MAX_NEWTON, tol=NEWTON_TOL) -> JointSystem:
    """Newton iteration from each seed, deduplicated into a joint system.

    Parameters
    ----------
    seeds : iterable of (Polynomial or array, lam)
        Starting points; tried in order.
    rng : int or Generator
        Seeds the random normalization covectors.
    extra_seeds : callable, optional
        ``extra_seeds(found_pairs) -> (v, lam)`` supplies further starting points
        while fewer than ``C(n+k-1, k-1)`` distinct pairs are known.
    deflate : bool
        Repel the iteration from solutions already found.
    """
    rng = np.random.default_rng(rng)
    prob = _NewtonProblem(mep, rng)
    N = math.comb(mep.n + mep.k - 1, mep.k - 1)
    max_attempts = max_attempts if max_attempts is not None else 40 * N + 20
    found_z: list[np.ndarray] = []
    pairs: list[Eigenpair] = []
    failures = 0
    attempts = 0
    queue = iter(list(seeds))

    while len(pairs) < N and attempts < max_attempts:
        try:
            v0, lam0 = next(queue)
        except StopIteration:
            if extra_seeds is None:
                break
            v0, lam0 = extra_seeds(pairs)
        attempts += 1
        v0 = v0.padded(mep.n + 1) if isinstance(v0, Polynomial) else np.asarray(v0, float)
        z0 = prob.chart(v0, np.asarray(lam0, float))
        if z0 is None:
            failures += 1
            continue
        z, res, its = _newton(prob, z0, found_z if deflate else [], max_iter, tol)
        if not res <= tol * 10:
            failures += 1
            log.debug("Newton seed %d did not converge (|F| = %.2e)", attempts, res)
            continue
        v, lam = prob.unpack(z)
        lam = normalize_lambda(lam)
        poly = Polynomial(v)
        vec = normalize(poly) if v[-1] != 0 else Polynomial(v / np.linalg.norm(v))
        r = mep.residual(vec, lam)
        if r > ACCEPT_RESIDUAL:
            failures += 1
            continue
        dup = any(
            ray_angle(lam, p.lam) < TAU_DUP
            and ray_angle(vec.padded(mep.n + 1), p.vector.padded(mep.n + 1)) < TAU_DUP
            for p in pairs
        )
        if dup:
            continue
        found_z.append(z)
        pairs.append(Eigenpair(vec, lam, r, iterations=its))

    system = assemble(mep, pairs, mep.family)
    if len(pairs) < N:
        err = IncompleteSystem(
            f"found {len(pairs)} of {N} eigenpairs after {attempts} attempts "
            f"({failures} non-converged)", found=len(pairs), expected=N)
        err.system = system
        raise err
    return system


def solve(fam: InnerProductFamily, n: int, *, seed=0, method: str = "auto",
          max_iter: int = MAX_NEWTON) -> JointSystem:
    """Jointly orthogonal system of degree ``n`` for ``fam``.

    ``method`` is ``"pencil"`` (k = 2 only), ``"newton"`` or ``"auto"``.
    """
    mep = build(fam, n)
    if method == "pencil" or (method == "auto" and fam.k == 2):
        return solve_k2(mep)
    rng = np.random.default_rng(seed)
    comps = list(compositions(n, fam.k))
    seeds = [seed_from_distribution(fam, n, c) for c in comps]

    def more(pairs):
        seen = {p.signature for p in pairs if p.signature is not None}
        for p in pairs:
            if p.signature is None:
                seen.add(signature(p.vector, fam.intervals))
        missing = [c for c in comps if c not in seen] or comps
        return _random_seed(fam, n, missing[rng.integers(len(missing))], rng)

    return solve_newton(mep, seeds, rng=rng, extra_seeds=more, max_iter=max_iter)


# -- closed-form template family -----------------------------------------------

def roots_of_unity_template(n: int, k: int) -> RectMEP:
    """0/1 banded template: ``A_i[j, j+1-i] = 1`` plus the wrap entry ``A_k[0, n] = 1``."""
    if n < 0 or k < 2:
        raise ValueError("need n >= 0 and k >= 2")
    rows, cols = n + k - 1, n + 1
    A = []
    for i in range(1, k + 1):
        a = np.zeros((rows, cols))
        for j in range(rows):
            c = j + 1 - i
            if 0 <= c <= n:
                a[j, c] = 1.0
        A.append(a)
    A[k - 1][0, n] += 1.0
    return RectMEP(k, n, tuple(A), "roots_of_unity")


def roots_of_unity_pair(n: int, k: int, choice) -> Eigenpair:
    """Closed-form pair from ``k-1`` distinct ``(n+k-1)``-th roots of unity.

    ``choice`` lists exponents ``r`` of ``zeta = exp(2 pi i r / (n+k-1))``.
    ``lam_j`` is the coefficient of ``x^(k-j)`` in ``prod(x - zeta)`` and
    ``v_j = det[conj(zeta)^0; ...; conj(zeta)^(k-3); zeta^(j+1)]``.
    """
    kappa = k - 1
    period = n + kappa
    choice = [int(r) % period for r in choice]
    if len(choice) != kappa or len(set(choice)) != kappa:
        raise DuplicateRoots(f"need {kappa} distinct roots of unity, got {choice}")
    zeta = np.exp(2j * np.pi * np.array(choice) / period)
    lam = np.poly(zeta)
    top = np.conj(zeta)[None, :] ** np.arange(kappa - 1)[:, None]
    v = np.empty(n + 1, dtype=complex)
    for j in range(n + 1):
        v[j] = np.linalg.det(np.vstack([top, zeta[None, :] ** (j + 1)]))

    closed = {r for r in choice} == {(-r) % period for r in choice}
    if closed:
        lam = lam.real
        if np.max(np.abs(v.imag)) > 1e-12 * np.max(np.abs(v)):
            big = v[np.argmax(np.abs(v))]
            v = v * abs(big) / big
        v = v.real
    mep = roots_of_unity_template(n, k)
    lam_n = normalize_lambda(lam)
    res = mep.residual(v, lam_n)
    return Eigenpair(v, lam_n, res, is_complex=not closed)


def roots_of_unity_pairs(n: int, k: int) -> list[tuple[tuple, Eigenpair]]:
    """All ``C(n+k-1, k-1)`` closed-form pairs keyed by their root choice."""
    return [(c, roots_of_unity_pair(n, k, c))
            for c in itertools.combinations(range(n + k - 1), k - 1)]


# -- M-matrix minors ------------------------------------------------------------

def m_matrix_minors(mep: RectMEP, fam: InnerProductFamily, u: Polynomial, v: Polynomial):
    """``M[i, j] = <x^i u, v>_j`` and its ``k`` minors with the last row deleted.

    Minor ``j`` (1-based) removes column ``j``.  For eigenvectors with
    distinct eigenvalues all minors vanish.
    """
    for p in (u, v):
        if p.degree is not None and p.degree > mep.n:
            raise ValueError(f"degree {p.degree} exceeds problem degree {mep.n}")
    M = fam.pairing_matrix(u, v, fam.k)
    minors = np.array([np.linalg.det(np.delete(M[:-1], j, axis=1)) for j in range(fam.k)])
    return M, minors


__all__ = [
    "RectMEP", "Eigenpair", "JointSystem", "build", "solve", "solve_k2", "solve_newton",
    "seed_from_distribution", "eigenvalue_formula", "roots_of_unity_template",
    "roots_of_unity_pair", "roots_of_unity_pairs", "m_matrix_minors", "ray_angle",
    "normalize_lambda", "signature", "orthogonality_matrices",
]
