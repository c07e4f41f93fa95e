"""Second-order operators whose polynomial eigenvectors are jointly orthogonal.

Covers the Heun operator and its Lamé species, the algebraic form of the
Whittaker-Hill (Ince) equation, the sextic radial Schrödinger operator and
Heine-Stieltjes equations with ``k`` intervals.  Each family comes with an
interval family for :mod:`jop.mep`, an operator matrix on ``V_n`` and a
pointwise differential-equation check.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import mep
from .errors import ComplexEigenvalues, DivisionRemainder
from .forms import InnerProductFamily
from .measure import IntervalMeasure
from .poly import Polynomial, differentiate, divmod_poly, from_roots, normalize, real_roots

ODE_GUARD = 1e-3


# -- operator matrices ----------------------------------------------------------

def operator_matrix(Q: Polynomial, P: Polynomial, c0: Polynomial, n: int,
                    rows: int | None = None) -> np.ndarray:
    """Matrix of ``f -> Q f'' + P f' + c0 f`` from ``V_n`` into monomials.

    Column ``s`` holds the coefficients of the image of ``x^s``.
    """
    if rows is None:
        degs = [d for d in ((Q.degree or 0) - 2, (P.degree or 0) - 1, c0.degree or 0)]
        rows = n + 1 + max(0, max(degs))
    L = np.zeros((rows, n + 1))
    for s in range(n + 1):
        e = Polynomial.monomial(s)
        img = Q * differentiate(e, 2) + P * differentiate(e) + c0 * e
        L[:, s] = img.padded(rows)
    return L


def _square(L: np.ndarray, n: int) -> np.ndarray:
    extra = L[n + 1:]
    if extra.size and np.max(np.abs(extra)) > 1e-12 * max(1.0, np.max(np.abs(L))):
        raise ValueError("operator does not preserve the polynomial degree")
    return L[: n + 1].copy()


def selfadjointness_residual(fam: InnerProductFamily, opmatrix: np.ndarray, j: int) -> float:
    """``|G L - (G L)^T| / |G L|`` with ``G[a, b] = m_j(a + b)``, ``a <= n``.

    ``G L`` collects ``<x^a, L x^b>_j``; symmetry is the matrix form of
    ``<L f, g>_j = <f, L g>_j`` on ``V_n``.  Rectangular operator matrices
    (images beyond degree ``n``) are allowed.
    """
    rows, cols = opmatrix.shape
    G = fam.gram(j, cols, rows)
    GL = G @ opmatrix
    nrm = np.linalg.norm(GL)
    return float(np.linalg.norm(GL - GL.T) / nrm) if nrm > 0 else 0.0


def _operator_system(fam: InnerProductFamily, L: np.ndarray, n: int) -> mep.JointSystem:
    """Eigenvectors of a degree-preserving operator as a joint system."""
    w, V = np.linalg.eig(L)
    scale = max(1.0, np.max(np.abs(w)))
    if np.max(np.abs(w.imag)) > 1e-8 * scale:
        raise ComplexEigenvalues(f"operator on V_{n} has non-real eigenvalues {w}")
    problem = mep.build(fam, n)
    pairs = []
    for i in range(n + 1):
        v = normalize(Polynomial(V[:, i].real))
        lam = mep.eigenvalue_formula(fam, v)
        pairs.append(mep.Eigenpair(v, lam, problem.residual(v, lam), spectral=float(w[i].real)))
    return mep.assemble(problem, pairs, fam)


def _cheb(lo: float, hi: float, count: int) -> np.ndarray:
    t = np.cos(np.pi * (np.arange(count) + 0.5) / count)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t[::-1]


def _guarded_samples(intervals, count: int) -> np.ndarray:
    per = max(1, -(-count // len(intervals)))
    pts = []
    for lo, hi in intervals:
        g = ODE_GUARD * (hi - lo)
        pts.append(_cheb(lo + g, hi - g, per))
    return np.concatenate(pts)


def _fit_residual(Hpsi: np.ndarray, psi: np.ndarray, scale: np.ndarray) -> tuple[float, float]:
    """Least-squares ``mu`` for ``H psi = mu psi`` and the relative misfit."""
    mu = float(Hpsi @ psi / (psi @ psi))
    r = np.abs(Hpsi - mu * psi)
    return float(np.max(r) / np.max(scale)), mu


# -- Heun and Lamé --------------------------------------------------------------

@dataclass(frozen=True)
class HeunSpec:
    """Singular points ``e_1 < e_2 < e_3``, exponents ``a_i > 0`` and degree ``n``."""

    e: tuple
    a: tuple
    n: int

    def __post_init__(self):
        e = tuple(float(v) for v in self.e)
        a = tuple(float(v) for v in self.a)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "a", a)
        if len(e) != 3 or len(a) != 3:
            raise ValueError("Heun data needs three singular points and three exponents")
        if not e[0] < e[1] < e[2]:
            raise ValueError(f"singular points must increase, got {e}")
        if min(a) <= 0:
            raise ValueError(f"exponents must be positive, got {a}")
        if self.n < 0:
            raise ValueError("degree must be >= 0")

    @property
    def Q(self) -> Polynomial:
        return from_roots(self.e)

    @property
    def P(self) -> Polynomial:
        return _log_derivative_numerator(self.e, self.a)

    def recovered_exponents(self) -> np.ndarray:
        """``P(e_i) / Q'(e_i)``, which reproduces ``a``."""
        dQ = differentiate(self.Q)
        return np.array([self.P(x) / dQ(x) for x in self.e])


def _log_derivative_numerator(e, m) -> Polynomial:
    """``sum_i m_i prod_{j != i} (x - e_j)``."""
    out = Polynomial()
    for i, mi in enumerate(m):
        out = out + from_roots([x for j, x in enumerate(e) if j != i], mi)
    return out


def interval_family(e, m, n_max: int) -> InnerProductFamily:
    """Intervals ``(e_(j-1), e_j)`` with weight ``prod |x - e_i|^(m_i - 1)``."""
    factors = tuple((x, mi - 1.0) for x, mi in zip(e, m))
    measures = [IntervalMeasure(lo, hi, singular_factors=factors) for lo, hi in zip(e, e[1:])]
    return InnerProductFamily(measures, n_max)


def heun_family(spec: HeunSpec) -> InnerProductFamily:
    return interval_family(spec.e, spec.a, spec.n)


def heun_operator(spec: HeunSpec, P: Polynomial | None = None) -> np.ndarray:
    """Unreduced matrix of ``Q d^2 + P d - n(n-1+sum a) x``; ``P`` may be overridden."""
    n = spec.n
    c0 = Polynomial([0.0, -n * (n - 1 + sum(spec.a))])
    return operator_matrix(spec.Q, spec.P if P is None else P, c0, n)


def heun_matrix(spec: HeunSpec) -> np.ndarray:
    """Square ``(n+1) x (n+1)`` matrix of the Heun operator on ``V_n``."""
    return _square(heun_operator(spec), spec.n)


def heun_solve(spec: HeunSpec) -> mep.JointSystem:
    """Operator eigenbasis; each pair carries the operator eigenvalue as ``spectral``."""
    return _operator_system(heun_family(spec), heun_matrix(spec), spec.n)


@dataclass
class LameSolution:
    eps: tuple
    n: int
    polynomial: Polynomial
    spectral: float


def lame_species(nu: int):
    """Patterns ``eps`` in ``{0,1}^3`` with ``nu - sum(eps)`` even and non-negative."""
    for eps in itertools.product((0, 1), repeat=3):
        if sum(eps) <= nu and (nu - sum(eps)) % 2 == 0:
            yield eps


def lame_catalog(e, nu: int) -> list[LameSolution]:
    """All Lamé solutions of degree ``nu`` for singular points ``e``.

    Species ``eps`` uses ``a_i = eps_i + 1/2`` and polynomial degree
    ``(nu - sum eps) / 2``; the total count is ``2 nu + 1``.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    out = []
    for eps in lame_species(nu):
        n = (nu - sum(eps)) // 2
        spec = HeunSpec(e, tuple(x + 0.5 for x in eps), n)
        L = heun_matrix(spec)
        w, V = np.linalg.eig(L)
        if np.max(np.abs(w.imag)) > 1e-8 * max(1.0, np.max(np.abs(w))):
            raise ComplexEigenvalues(f"Lamé species {eps} has non-real eigenvalues")
        for i in np.argsort(w.real):
            out.append(LameSolution(eps, n, normalize(Polynomial(V[:, i].real)), float(w[i].real)))
    return out


def lame_residual(e, nu: int, sol: LameSolution, samples: int = 24) -> float:
    """Spread of ``4 (Q y'' + Q' y' / 2) / y - nu(nu+1) x`` over sample points.

    ``y = prod |x - e_i|^(eps_i / 2) p``; the spread is zero exactly when
    ``y`` solves the algebraic Lamé equation for some eigenvalue.
    """
    e = tuple(float(v) for v in e)
    Q = from_roots(e)
    dQ = differentiate(Q)
    p, dp, ddp = sol.polynomial, differentiate(sol.polynomial), differentiate(sol.polynomial, 2)
    x = _guarded_samples(list(zip(e, e[1:])), samples)
    x = x[np.abs(p(x)) > 1e-6 * np.max(np.abs(p(x)))]
    half = np.array(sol.eps) / 2.0
    d = x[:, None] - np.array(e)[None, :]
    f1 = np.sum(half / d, axis=1)
    f2 = f1 ** 2 - np.sum(half / d ** 2, axis=1)
    y1 = f1 + dp(x) / p(x)
    y2 = f2 + 2 * f1 * dp(x) / p(x) + ddp(x) / p(x)
    val = 4 * (Q(x) * y2 + 0.5 * dQ(x) * y1) - nu * (nu + 1) * x
    scale = np.max(np.abs(4 * Q(x) * y2) + np.abs(2 * dQ(x) * y1) + nu * (nu + 1) * np.abs(x))
    return float(np.ptp(val) / scale) if scale > 0 else 0.0


# -- Ince -----------------------------------------------------------------------

@dataclass(frozen=True)
class InceSpec:
    """``alpha < 0``, ``a_1, a_2`` in ``{1/2, 3/2}``, degree ``n``."""

    alpha: float
    a1: float
    a2: float
    n: int

    def __post_init__(self):
        if not self.alpha < 0:
            raise ValueError("alpha must be negative")
        for a in (self.a1, self.a2):
            if a not in (0.5, 1.5):
                raise ValueError(f"exponent {a} is not 1/2 or 3/2")
        if self.n < 0:
            raise ValueError("degree must be >= 0")

    @property
    def eps(self) -> tuple[int, int]:
        return int(self.a1 - 0.5), int(self.a2 - 0.5)

    @property
    def nu(self) -> int:
        return 2 * self.n + 1 + sum(self.eps)

    @property
    def shift(self) -> float:
        """Additive constant ``2 alpha^2 + 4 (eps_2 - eps_1) alpha - (eps_1 + eps_2)^2``."""
        e1, e2 = self.eps
        return 2 * self.alpha ** 2 + 4 * (e2 - e1) * self.alpha - (e1 + e2) ** 2


def ince_family(spec: InceSpec) -> InnerProductFamily:
    """``(-1, 1)`` and ``(1, inf)`` with weight ``e^(2 alpha x) |1-x|^(a1-1) |1+x|^(a2-1)``."""
    factors = ((1.0, spec.a1 - 1.0), (-1.0, spec.a2 - 1.0))
    c = 2.0 * spec.alpha
    return InnerProductFamily([
        IntervalMeasure(-1.0, 1.0, singular_factors=factors, exp_linear=c),
        IntervalMeasure(1.0, math.inf, singular_factors=factors, exp_linear=c),
    ], spec.n)


def ince_operator(spec: InceSpec, P: Polynomial | None = None) -> np.ndarray:
    a = spec.alpha
    Q = Polynomial([-1.0, 0.0, 1.0])
    if P is None:
        P = Polynomial([spec.a1 - spec.a2 - 2 * a, spec.a1 + spec.a2, 2 * a])
    c0 = Polynomial([0.0, -2.0 * spec.n * a])
    return operator_matrix(Q, P, c0, spec.n)


def ince_matrix(spec: InceSpec) -> np.ndarray:
    return _square(ince_operator(spec), spec.n)


def ince_solve(spec: InceSpec) -> mep.JointSystem:
    return _operator_system(ince_family(spec), ince_matrix(spec), spec.n)


def _trig_prefactor(eps, t):
    """``sin^e1 cos^e2`` and its first two derivatives, for ``e_i`` in ``{0, 1}``."""
    s, c = np.sin(t), np.cos(t)
    table = {
        (0, 0): (np.ones_like(t), np.zeros_like(t), np.zeros_like(t)),
        (1, 0): (s, c, -s),
        (0, 1): (c, -s, -c),
        (1, 1): (s * c, np.cos(2 * t), -2 * np.sin(2 * t)),
    }
    return table[tuple(eps)]


def ince_wavefunction(spec: InceSpec, E: Polynomial, theta):
    """``psi = sin^e1 cos^e2 E(cos 2t) e^(alpha cos 2t)`` and ``psi''``."""
    t = np.asarray(theta, dtype=float)
    a = spec.alpha
    f, f1, f2 = _trig_prefactor(spec.eps, t)
    u = np.cos(2 * t)
    u1, u2 = -2 * np.sin(2 * t), -4 * np.cos(2 * t)
    ex = np.exp(a * u)
    E0, E1, E2 = E(u), differentiate(E)(u), differentiate(E, 2)(u)
    F0 = E0 * ex
    F1 = (E1 + a * E0) * ex
    F2 = (E2 + 2 * a * E1 + a * a * E0) * ex
    g, g1, g2 = F0, F1 * u1, F2 * u1 ** 2 + F1 * u2
    return f * g, f2 * g + 2 * f1 * g1 + f * g2


def ince_samples(count: int = 24) -> np.ndarray:
    return _cheb(ODE_GUARD, np.pi / 2 - ODE_GUARD, count)


def ince_check(spec: InceSpec, system, samples=None, nu: float | None = None) -> float:
    """Largest relative Whittaker-Hill misfit over the members of ``system``.

    ``H = -d^2 - 4 alpha nu cos 2t - 2 alpha^2 cos 4t``; the eigenvalue is
    fitted per member.  ``nu`` defaults to ``2n + 1 + eps_1 + eps_2``.
    """
    t = ince_samples() if samples is None else np.asarray(samples, dtype=float)
    nu = spec.nu if nu is None else nu
    a = spec.alpha
    V = -4 * a * nu * np.cos(2 * t) - 2 * a * a * np.cos(4 * t)
    worst = 0.0
    for E in _members(system):
        psi, d2 = ince_wavefunction(spec, E, t)
        H = -d2 + V * psi
        r, _ = _fit_residual(H, psi, np.abs(d2) + np.abs(V * psi))
        worst = max(worst, r)
    return worst


def ince_fitted_eigenvalues(spec: InceSpec, system, samples=None) -> np.ndarray:
    t = ince_samples() if samples is None else np.asarray(samples, dtype=float)
    a = spec.alpha
    V = -4 * a * spec.nu * np.cos(2 * t) - 2 * a * a * np.cos(4 * t)
    out = []
    for E in _members(system):
        psi, d2 = ince_wavefunction(spec, E, t)
        out.append(_fit_residual(-d2 + V * psi, psi, np.abs(d2))[1])
    return np.array(out)


def ince_periodicity(spec: InceSpec, system, samples=None) -> list[str]:
    """``"periodic"`` or ``"antiperiodic"`` under ``t -> t + pi``, per member."""
    t = ince_samples() if samples is None else np.asarray(samples, dtype=float)
    out = []
    for E in _members(system):
        p0, _ = ince_wavefunction(spec, E, t)
        p1, _ = ince_wavefunction(spec, E, t + np.pi)
        scale = np.max(np.abs(p0))
        if np.max(np.abs(p1 - p0)) < 1e-10 * scale:
            out.append("periodic")
        elif np.max(np.abs(p1 + p0)) < 1e-10 * scale:
            out.append("antiperiodic")
        else:
            out.append("mixed")
    return out


def ince_expected_class(spec: InceSpec) -> str:
    return "periodic" if spec.nu % 2 else "antiperiodic"


# -- sextic ---------------------------------------------------------------------

@dataclass(frozen=True)
class SexticSpec:
    ell: float
    n: int

    def __post_init__(self):
        if not self.ell > -1:
            raise ValueError("ell must exceed -1")
        if self.n < 0:
            raise ValueError("degree must be >= 0")

    @property
    def nu(self) -> float:
        return 4 * self.n + 5 + 2 * self.ell


def sextic_family(spec: SexticSpec) -> InnerProductFamily:
    """``(-inf, 0)`` and ``(0, inf)`` with weight ``|x|^(ell + 1/2) e^(-x^2/2)``."""
    f = ((0.0, spec.ell + 0.5),)
    return InnerProductFamily([
        IntervalMeasure(-math.inf, 0.0, singular_factors=f, exp_gauss=True),
        IntervalMeasure(0.0, math.inf, singular_factors=f, exp_gauss=True),
    ], spec.n)


def sextic_operator(spec: SexticSpec, P: Polynomial | None = None) -> np.ndarray:
    Q = Polynomial([0.0, -2.0])
    if P is None:
        P = Polynomial([-2 * spec.ell - 3, 0.0, 2.0])
    c0 = Polynomial([0.0, -2.0 * spec.n])
    return operator_matrix(Q, P, c0, spec.n)


def sextic_matrix(spec: SexticSpec) -> np.ndarray:
    return _square(sextic_operator(spec), spec.n)


def sextic_solve(spec: SexticSpec) -> mep.JointSystem:
    return _operator_system(sextic_family(spec), sextic_matrix(spec), spec.n)


def sextic_wavefunction(spec: SexticSpec, E: Polynomial, r):
    """``psi = r^(ell+1) e^(-r^4/4) E(r^2)`` and ``psi''``."""
    r = np.asarray(r, dtype=float)
    l1 = spec.ell + 1
    eh = r ** l1 * np.exp(-r ** 4 / 4)
    h1 = l1 / r - r ** 3
    h2 = -l1 / r ** 2 - 3 * r ** 2
    u = r * r
    G = E(u)
    G1 = 2 * r * differentiate(E)(u)
    G2 = 2 * differentiate(E)(u) + 4 * u * differentiate(E, 2)(u)
    return eh * G, eh * ((h2 + h1 * h1) * G + 2 * h1 * G1 + G2)


def sextic_samples(count: int = 24) -> np.ndarray:
    return _cheb(0.3, 2.5, count)


def sextic_check(spec: SexticSpec, system, samples=None, nu: float | None = None) -> float:
    """Largest relative misfit of ``-psi'' + (r^6 - nu r^2 + ell(ell+1)/r^2) psi = mu psi``."""
    r = sextic_samples() if samples is None else np.asarray(samples, dtype=float)
    nu = spec.nu if nu is None else nu
    V = r ** 6 - nu * r ** 2 + spec.ell * (spec.ell + 1) / r ** 2
    worst = 0.0
    for E in _members(system):
        psi, d2 = sextic_wavefunction(spec, E, r)
        res, _ = _fit_residual(-d2 + V * psi, psi, np.abs(d2) + np.abs(V * psi))
        worst = max(worst, res)
    return worst


def _members(system):
    if isinstance(system, mep.JointSystem):
        return system.polynomials
    if isinstance(system, Polynomial):
        return [system]
    return list(system)


# -- Heine-Stieltjes --------------------------------------------------------------

@dataclass(frozen=True)
class HeineStieltjesSpec:
    """Points ``e_0 < ... < e_k``, exponents ``m_j > 0`` and degree ``n``."""

    e: tuple
    m: tuple
    n: int

    def __post_init__(self):
        e = tuple(float(v) for v in self.e)
        m = tuple(float(v) for v in self.m)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "m", m)
        if len(e) < 3 or len(m) != len(e):
            raise ValueError("need k+1 >= 3 points and as many exponents")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError(f"points must increase, got {e}")
        if min(m) <= 0:
            raise ValueError(f"exponents must be positive, got {m}")
        if self.n < 0:
            raise ValueError("degree must be >= 0")

    @property
    def k(self) -> int:
        return len(self.e) - 1

    @property
    def Q(self) -> Polynomial:
        return from_roots(self.e)

    @property
    def P(self) -> Polynomial:
        return _log_derivative_numerator(self.e, self.m)

    @property
    def van_vleck_leading(self) -> float:
        n = self.n
        return -n * (n - 1 + sum(self.m))

    @property
    def intervals(self):
        return list(zip(self.e, self.e[1:]))


def heine_stieltjes_family(spec: HeineStieltjesSpec) -> InnerProductFamily:
    return interval_family(spec.e, spec.m, spec.n)


def heine_stieltjes_operator(spec: HeineStieltjesSpec, P: Polynomial | None = None) -> np.ndarray:
    """``Q d^2 + P d`` from ``V_n`` into ``V_(n+k-1)``."""
    return operator_matrix(spec.Q, spec.P if P is None else P, Polynomial(), spec.n,
                           rows=spec.n + spec.k)


def van_vleck(spec: HeineStieltjesSpec, y: Polynomial, tol: float = 1e-8) -> Polynomial:
    """``V = -(Q y'' + P y') / y`` by polynomial division; the remainder must vanish."""
    num = -(spec.Q * differentiate(y, 2) + spec.P * differentiate(y))
    if num.is_zero():
        return Polynomial()
    V, rem = divmod_poly(num, y)
    scale = np.linalg.norm(num.coeffs)
    if np.linalg.norm(rem.coeffs) > tol * scale:
        raise DivisionRemainder(
            f"remainder {np.linalg.norm(rem.coeffs):.2e} relative to {scale:.2e}")
    return V


def heine_stieltjes_residual(spec: HeineStieltjesSpec, y: Polynomial, V: Polynomial,
                             samples: int = 30) -> float:
    """Relative ``Q y'' + P y' + V y`` at guarded Chebyshev points of every interval."""
    x = _guarded_samples(spec.intervals, samples)
    t1 = spec.Q(x) * differentiate(y, 2)(x)
    t2 = spec.P(x) * differentiate(y)(x)
    t3 = V(x) * y(x)
    scale = np.max(np.abs(t1) + np.abs(t2) + np.abs(t3))
    return float(np.max(np.abs(t1 + t2 + t3)) / scale) if scale > 0 else 0.0


def electrostatic_residual(spec: HeineStieltjesSpec, y: Polynomial) -> float:
    """Force balance ``sum_l 1/(r_i - r_l) + sum_j (m_j/2)/(r_i - e_j)`` at the roots."""
    r = np.array(real_roots(y))
    if r.size != (y.degree or 0):
        return math.inf
    worst = 0.0
    for i, ri in enumerate(r):
        a = np.delete(r, i)
        terms = np.concatenate([1.0 / (ri - a), 0.5 * np.array(spec.m) / (ri - np.array(spec.e))])
        worst = max(worst, abs(terms.sum()) / np.abs(terms).sum())
    return worst


@dataclass
class HeineStieltjesResult:
    system: mep.JointSystem
    van_vleck: list
    ode_residuals: list

    @property
    def max_ode_residual(self) -> float:
        return max(self.ode_residuals, default=0.0)


def heine_stieltjes_solve(spec: HeineStieltjesSpec, seed=0) -> HeineStieltjesResult:
    """Solve the interval family, then recover each Van Vleck polynomial by division."""
    fam = heine_stieltjes_family(spec)
    system = mep.solve(fam, spec.n, seed=seed)
    vv, res = [], []
    for E in system.polynomials:
        V = van_vleck(spec, E)
        vv.append(V)
        res.append(heine_stieltjes_residual(spec, E, V))
    return HeineStieltjesResult(system, vv, res)
