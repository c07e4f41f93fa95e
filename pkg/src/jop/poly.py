"""Dense univariate polynomials in the monomial basis.

Coefficients are stored lowest degree first, so ``coeffs[s]`` multiplies
``x**s``.  Arithmetic is delegated to :mod:`numpy.polynomial.polynomial`;
root finding adds Newton polishing and multiplicity clustering on top of the
companion-matrix eigenvalues.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import ZeroPolynomial

ROOT_CLUSTER_TOL = 1e-7


class Polynomial:
    """Immutable real polynomial.

    Trailing (highest-degree) zeros are trimmed, so the zero polynomial has
    an empty coefficient tuple and ``degree is None``.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[float] = ()):
        c = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                       dtype=float).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        object.__setattr__(self, "_coeffs", tuple(float(v) for v in c))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def monomial(cls, s: int, scale: float = 1.0) -> "Polynomial":
        c = np.zeros(s + 1)
        c[s] = scale
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array(self._coeffs, dtype=float)

    @property
    def degree(self) -> int | None:
        return len(self._coeffs) - 1 if self._coeffs else None

    @property
    def leading(self) -> float:
        return self._coeffs[-1] if self._coeffs else 0.0

    def is_zero(self) -> bool:
        return not self._coeffs

    def padded(self, length: int) -> np.ndarray:
        """Coefficient vector zero-padded (never truncated) to ``length``."""
        c = self.coeffs
        if c.size > length:
            raise ValueError(f"degree {self.degree} does not fit in {length} coefficients")
        return np.pad(c, (0, length - c.size))

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._coeffs == other._coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self._coeffs)

    def __repr__(self):
        return f"Polynomial({list(self._coeffs)!r})"

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_coerce(other), -1.0))

    def __rsub__(self, other):
        return add(_coerce(other), scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__


def _coerce(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial([float(p)])


def evaluate(p: Polynomial, x):
    """Horner evaluation; ``x`` may be a scalar or an array (real or complex)."""
    c = p._coeffs
    x = np.asarray(x)
    acc = np.zeros_like(x, dtype=np.result_type(x, float))
    for a in reversed(c):
        acc = acc * x + a
    return acc[()] if acc.ndim == 0 else acc


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    return Polynomial(npp.polyadd(p.coeffs, q.coeffs))


def scale(p: Polynomial, factor: float) -> Polynomial:
    return Polynomial(p.coeffs * factor)


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.is_zero() or q.is_zero():
        return Polynomial()
    return Polynomial(npp.polymul(p.coeffs, q.coeffs))


def shift(p: Polynomial, r: int) -> Polynomial:
    """Multiply by ``x**r``."""
    if p.is_zero():
        return p
    return Polynomial(np.concatenate([np.zeros(r), p.coeffs]))


def differentiate(p: Polynomial, order: int = 1) -> Polynomial:
    if p.degree is None or p.degree < order:
        return Polynomial()
    return Polynomial(npp.polyder(p.coeffs, order))


def divmod_poly(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial]:
    if q.is_zero():
        raise ZeroPolynomial("division by the zero polynomial")
    if p.is_zero():
        return Polynomial(), Polynomial()
    quo, rem = npp.polydiv(p.coeffs, q.coeffs)
    return Polynomial(quo), Polynomial(rem)


def normalize(p: Polynomial) -> Polynomial:
    """Divide by the leading coefficient."""
    if p.is_zero():
        raise ZeroPolynomial("cannot normalize the zero polynomial")
    return Polynomial(p.coeffs / p.leading)


def from_roots(roots: Sequence[float], scale: float = 1.0) -> Polynomial:
    """``scale * prod(x - r)``, expanded."""
    roots = list(roots)
    if not roots:
        return Polynomial([scale])
    c = npp.polyfromroots(roots)
    return Polynomial(np.real_if_close(c).real * scale)


def _polish(c: np.ndarray, dc: np.ndarray, z: complex, steps: int = 8) -> complex:
    pz = npp.polyval(z, c)
    for _ in range(steps):
        d = npp.polyval(z, dc)
        if d == 0:
            break
        znew = z - pz / d
        pnew = npp.polyval(znew, c)
        if abs(pnew) >= abs(pz):
            break
        z, pz = znew, pnew
    return z


def roots(p: Polynomial, tol: float = ROOT_CLUSTER_TOL) -> list[tuple[float, float, int]]:
    """All complex roots as ``(real, imag, multiplicity)`` triples.

    Companion eigenvalues are Newton polished, then roots closer than ``tol``
    are merged into one entry.  Multiplicities sum to the degree.
    """
    if p.is_zero():
        raise ZeroPolynomial("roots of the zero polynomial are undefined")
    if p.degree == 0:
        return []
    c = p.coeffs
    dc = npp.polyder(c)
    raw = [_polish(c, dc, complex(z)) for z in npp.polyroots(c)]

    clusters: list[list[complex]] = []
    for z in sorted(raw, key=lambda w: (w.real, w.imag)):
        for cl in clusters:
            if abs(np.mean(cl) - z) < tol:
                cl.append(z)
                break
        else:
            clusters.append([z])
    out = []
    for cl in clusters:
        z = complex(np.mean(cl))
        im = 0.0 if abs(z.imag) < tol else z.imag
        out.append((z.real, im, len(cl)))
    return sorted(out)


def real_roots(p: Polynomial, tol: float = ROOT_CLUSTER_TOL) -> list[float]:
    """Real roots repeated by multiplicity."""
    out: list[float] = []
    for re, im, mult in roots(p, tol):
        if im == 0.0:
            out.extend([re] * mult)
    return out
