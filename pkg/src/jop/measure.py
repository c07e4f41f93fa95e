"""Weighted intervals and certified moment tables.

An :class:`IntervalMeasure` describes ``w(x) dx`` on one interval, where
``w`` is a product of endpoint/exterior power factors ``|x - e|**b``
(``b > -1``), an optional ``exp(c x)`` factor, an optional ``exp(-x**2/2)``
factor and a positive polynomial.  Moments are computed with a Gauss rule
matched to the weight class and certified by doubling the rule order.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import roots_genlaguerre, roots_jacobi

from .errors import ConvergenceFailure, InsufficientMoments, NonIntegrable
from .poly import Polynomial, real_roots

log = logging.getLogger(__name__)

CERTIFY_TOL = 1e-13
TARGET_REL_ERR = 1e-12
HARD_REL_ERR = 1e-9
_MAX_ORDER = 2048
_MAX_LAGUERRE = 256


def _as_float(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
    return float(v)


@dataclass(frozen=True)
class IntervalMeasure:
    """Weight ``w`` on ``(lower, upper)``.

    ``singular_factors`` holds ``(location, exponent)`` pairs contributing
    ``|x - location|**exponent``; every location must be an endpoint of the
    interval or lie outside its closure.
    """

    lower: float
    upper: float
    singular_factors: tuple = ()
    exp_linear: float = 0.0
    exp_gauss: bool = False
    smooth_factor: Polynomial = field(default_factory=lambda: Polynomial([1.0]))

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        factors = tuple((float(e), float(b)) for e, b in self.singular_factors)
        object.__setattr__(self, "singular_factors", factors)
        object.__setattr__(self, "exp_linear", float(self.exp_linear))
        object.__setattr__(self, "exp_gauss", bool(self.exp_gauss))
        if not isinstance(self.smooth_factor, Polynomial):
            object.__setattr__(self, "smooth_factor", Polynomial(self.smooth_factor))

        if not lo < hi:
            raise NonIntegrable(f"empty interval ({lo}, {hi})")
        for e, b in factors:
            if not b > -1:
                raise NonIntegrable(f"exponent {b} at {e} is not > -1")
            if not math.isfinite(e):
                raise NonIntegrable("singular factor location must be finite")
            if lo < e < hi:
                raise NonIntegrable(f"singular factor at {e} lies inside ({lo}, {hi})")
        c = self.exp_linear
        if hi == math.inf and not (c < 0 or self.exp_gauss):
            raise NonIntegrable("upper = +inf needs exp_linear < 0 or the Gaussian factor")
        if lo == -math.inf and not (c > 0 or self.exp_gauss):
            raise NonIntegrable("lower = -inf needs exp_linear > 0 or the Gaussian factor")
        p = self.smooth_factor
        if p.is_zero():
            raise NonIntegrable("smooth factor is identically zero")
        for r in real_roots(p):
            if lo < r < hi:
                raise NonIntegrable(f"smooth factor changes sign at {r} inside the interval")
        if p(self._interior_point()) <= 0:
            raise NonIntegrable("smooth factor must be positive on the interval")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_config(cls, block: dict) -> "IntervalMeasure":
        """Build from a config block.

        ``exponents`` entries are ``[e, a]`` pairs meaning ``|x - e|**(a - 1)``.
        """
        try:
            lo, hi = (_as_float(v) for v in block["interval"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NonIntegrable(f"bad interval in measure block {block!r}") from exc
        factors = tuple((_as_float(e), float(a) - 1.0) for e, a in block.get("exponents", ()))
        return cls(
            lower=lo,
            upper=hi,
            singular_factors=factors,
            exp_linear=float(block.get("exp_linear", 0.0)),
            exp_gauss=bool(block.get("gauss", False)),
            smooth_factor=Polynomial(block.get("smooth", [1.0])),
        )

    def to_config(self) -> dict:
        def enc(v):
            return "inf" if v == math.inf else "-inf" if v == -math.inf else v

        return {
            "interval": [enc(self.lower), enc(self.upper)],
            "exponents": [[e, b + 1.0] for e, b in self.singular_factors],
            "exp_linear": self.exp_linear,
            "gauss": self.exp_gauss,
            "smooth": list(self.smooth_factor.coeffs),
        }

    def reflect(self) -> "IntervalMeasure":
        """Image under ``x -> -x``."""
        c = self.smooth_factor.coeffs
        c = c * (-1.0) ** np.arange(c.size)
        return IntervalMeasure(
            lower=-self.upper,
            upper=-self.lower,
            singular_factors=tuple((-e, b) for e, b in self.singular_factors),
            exp_linear=-self.exp_linear,
            exp_gauss=self.exp_gauss,
            smooth_factor=Polynomial(c),
        )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def _interior_point(self) -> float:
        lo, hi = self.lower, self.upper
        if math.isfinite(lo) and math.isfinite(hi):
            return 0.5 * (lo + hi)
        if math.isfinite(lo):
            return lo + 1.0
        if math.isfinite(hi):
            return hi - 1.0
        return 0.0

    # -- weight evaluation ----------------------------------------------------

    def _exponent_at(self, point: float) -> float:
        return sum(b for e, b in self.singular_factors if e == point)

    def _rest(self, x, skip=(), with_exp=True):
        out = np.ones_like(x, dtype=float)
        for e, b in self.singular_factors:
            if e in skip:
                continue
            out *= np.abs(x - e) ** b
        if with_exp:
            expo = self.exp_linear * x
            if self.exp_gauss:
                expo = expo - 0.5 * x * x
            out *= np.exp(expo)
        return out * self.smooth_factor(x)

    def weight(self, x):
        """Evaluate ``w(x)``; zero outside the interval."""
        x = np.asarray(x, dtype=float)
        inside = (x > self.lower) & (x < self.upper)
        out = np.zeros_like(x)
        out[inside] = self._rest(x[inside])
        return out[()] if out.ndim == 0 else out

    def log_weight(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for e, b in self.singular_factors:
            out += b * np.log(np.abs(x - e))
        out += self.exp_linear * x
        if self.exp_gauss:
            out -= 0.5 * x * x
        return out + np.log(np.abs(self.smooth_factor(x)))

    # -- quadrature -------------------------------------------------------------

    def quadrature(self, order: int, max_power: int = 0):
        """Nodes and weights with ``sum(W * f(x)) ~ integral f w dx``.

        ``max_power`` only matters for unbounded intervals, where it sets the
        truncation horizon so that ``x**max_power * w`` is resolved.
        """
        lo, hi = self.lower, self.upper
        if math.isfinite(lo) and math.isfinite(hi):
            return self._jacobi_rule(order, lo, hi)
        if math.isfinite(lo):
            return self._halfline_rule(order, max_power)
        if math.isfinite(hi):
            x, w = self.reflect().quadrature(order, max_power)
            return -x, w
        right = replace(self, lower=0.0)
        left = replace(self, upper=0.0)
        xr, wr = right.quadrature(order, max_power)
        xl, wl = left.quadrature(order, max_power)
        return np.concatenate([xl, xr]), np.concatenate([wl, wr])

    def _jacobi_rule(self, order, lo, hi, tail_free=False):
        beta = self._exponent_at(lo)
        alpha = 0.0 if tail_free else self._exponent_at(hi)
        t, w = roots_jacobi(order, alpha, beta)
        half = 0.5 * (hi - lo)
        x = lo + half * (1.0 + t)
        skip = (lo,) if tail_free else (lo, hi)
        return x, w * half ** (alpha + beta + 1.0) * self._rest(x, skip=skip)

    def _halfline_rule(self, order, max_power):
        lo, c = self.lower, self.exp_linear
        beta = self._exponent_at(lo)
        if not self.exp_gauss and order <= _MAX_LAGUERRE:
            t, w = roots_genlaguerre(order, beta)
            rate = -c
            x = lo + t / rate
            scale = math.exp(c * lo) * rate ** (-(beta + 1.0))
            return x, w * scale * self._rest(x, skip=(lo,), with_exp=False)
        horizon = self._horizon(max_power)
        return self._jacobi_rule(order, lo, horizon, tail_free=True)

    def _horizon(self, max_power: int) -> float:
        lo = self.lower
        d = lo + np.concatenate([np.linspace(1e-6, 1.0, 64), 2.0 ** (np.arange(1, 240) / 8.0)])
        g = self.log_weight(d) + max_power * np.log(np.maximum(np.abs(d), 1e-300))
        keep = np.flatnonzero(g >= g.max() - 80.0)
        return float(d[min(keep[-1] + 1, d.size - 1)])


@dataclass(frozen=True)
class MomentTable:
    """Moments ``m(s) = integral x**s w(x) dx`` for ``s = 0..S``.

    ``order`` is the rule order of the accepted moments; the rule at half that
    order agrees with them to ``certified_rel_err``.
    """

    measure: IntervalMeasure
    moments: np.ndarray
    certified_rel_err: float
    abs_moments: np.ndarray = field(repr=False, default=None)
    order: int = 0

    @property
    def size(self) -> int:
        """Largest available moment index ``S``."""
        return self.moments.size - 1

    def __getitem__(self, s):
        return self.moments[s]


def _certify(measure: IntervalMeasure, count: int) -> MomentTable:
    """Double the rule order until successive moments agree.

    Rules that are exact for polynomials stop improving once node round-off
    dominates; a change that no longer shrinks but is already below the
    target is accepted as that noise floor.
    """
    powers = np.arange(count + 1)
    order = max(16, count // 2 + 4)
    prev = None
    err, last_err = math.inf, math.inf
    while True:
        x, w = measure.quadrature(order, max_power=count)
        V = x[:, None] ** powers
        m = w @ V
        a = np.abs(w) @ np.abs(V)
        if not np.all(np.isfinite(m)):
            raise ConvergenceFailure(f"non-finite moments for {measure}")
        if prev is not None:
            err = float(np.max(np.abs(m - prev) / np.where(a > 0, a, 1.0)))
            if err < CERTIFY_TOL:
                break
            if err > 0.5 * last_err and min(err, last_err) <= TARGET_REL_ERR:
                if last_err < err:
                    m, a, err, order = prev, prev_a, last_err, order // 2
                break
        if order >= _MAX_ORDER:
            if err <= HARD_REL_ERR:
                log.warning("moments certified only to %.2e for %s", err, measure)
                break
            raise ConvergenceFailure(
                f"moment quadrature did not converge (rel. change {err:.2e}) for {measure}"
            )
        prev, prev_a, last_err = m, a, err
        order *= 2
    m.setflags(write=False)
    a.setflags(write=False)
    return MomentTable(measure, m, max(err, np.finfo(float).eps), a, order)


@functools.lru_cache(maxsize=512)
def _cached(measure: IntervalMeasure, count: int) -> MomentTable:
    return _certify(measure, count)


def moments(measure: IntervalMeasure, count: int) -> MomentTable:
    """Certified moments ``m(0..count)``; results are cached per measure."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return _cached(measure, int(count))


def inner_product(mt: MomentTable, p: Polynomial, q: Polynomial) -> float:
    """``<p, q> = sum_{a,b} p_a q_b m(a+b)``, summed with ``math.fsum``."""
    if p.is_zero() or q.is_zero():
        return 0.0
    need = p.degree + q.degree
    if need > mt.size:
        raise InsufficientMoments(f"need moments up to {need}, table has {mt.size}")
    # correctly rounded sum of p_a q_b m(a+b): symmetric and shift-exact
    a = np.arange(p.coeffs.size)[:, None] + np.arange(q.coeffs.size)[None, :]
    terms = np.multiply.outer(p.coeffs, q.coeffs) * mt.moments[a]
    return math.fsum(terms.ravel())


def gram_matrix(mt: MomentTable, rows: int, cols: int) -> np.ndarray:
    """Hankel matrix with entry ``(i, s) = m(i + s)``."""
    if rows + cols - 2 > mt.size:
        raise InsufficientMoments(f"{rows}x{cols} Gram matrix needs {rows + cols - 2} moments")
    idx = np.arange(rows)[:, None] + np.arange(cols)[None, :]
    return mt.moments[idx].copy()


def hankel_is_positive(mt: MomentTable, size: int | None = None) -> bool:
    """Cholesky test of the diagonally scaled square Hankel matrix."""
    t = mt.size // 2 + 1 if size is None else size
    H = gram_matrix(mt, t, t)
    d = 1.0 / np.sqrt(np.diag(H))
    try:
        np.linalg.cholesky(H * d[:, None] * d[None, :])
    except np.linalg.LinAlgError:
        return False
    return True
