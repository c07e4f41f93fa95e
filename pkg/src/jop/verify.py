"""Independent checks on a solved joint system.

Each check returns a :class:`Check` with the observed value and its
threshold, so reports and the acceptance suite share one implementation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import mep
from .forms import InnerProductFamily, scaled_deleted, scaled_rank_one
from .poly import Polynomial

ORTHO_TOL = 1e-8
ANGLE_TOL = 1e-8


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}  {self.name:<28} {self.value:11.3e}  (limit {self.threshold:.1e}){extra}"


def _below(name, value, threshold, detail=""):
    return Check(name, float(value), threshold, bool(value < threshold), detail)


def check_count(system: mep.JointSystem) -> Check:
    N = system.expected_count
    return Check("count", len(system), N, len(system) == N, f"{len(system)} of {N}")


def check_residuals(system: mep.JointSystem, tol: float = mep.ACCEPT_RESIDUAL) -> Check:
    return _below("eigen residual", system.max_residual, tol)


def check_distinct(system: mep.JointSystem) -> Check:
    """Smallest angle between eigenvalue rays must exceed the duplicate threshold."""
    angle = system.min_angle if len(system) > 1 else math.pi / 2
    return Check("distinct eigenvalues", angle, mep.TAU_DUP, angle > mep.TAU_DUP)


def check_real(system: mep.JointSystem) -> Check:
    imag = 0.0
    for p in system:
        imag = max(imag, float(np.max(np.abs(np.imag(p.lam)))))
    return _below("real eigenpairs", imag, 1e-12)


def joint_orthogonality(fam: InnerProductFamily, polys) -> float:
    """Largest scaled |deleted form| over distinct members and all ``j``."""
    worst = 0.0
    for p, q in itertools.combinations(polys, 2):
        worst = max(worst, float(np.max(scaled_deleted(fam, p, q))))
    return worst


def mutual_rank_one(fam: InnerProductFamily, polys) -> float:
    worst = 0.0
    for p, q in itertools.combinations(polys, 2):
        worst = max(worst, scaled_rank_one(fam, p, q))
    return worst


def rank_one_complement(fam: InnerProductFamily, polys, n: int, trials: int = 50,
                        rng=None) -> float:
    """Largest scaled |rank-one form(E, q)| for random ``q`` of degree < ``n``."""
    if n == 0:
        return 0.0
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        q = Polynomial(rng.standard_normal(int(rng.integers(1, n + 1))))
        if q.is_zero():
            continue
        for p in polys:
            worst = max(worst, scaled_rank_one(fam, p, q))
    return worst


def eigenvalue_angle(fam: InnerProductFamily, system: mep.JointSystem) -> float:
    worst = 0.0
    for p in system:
        worst = max(worst, mep.ray_angle(p.lam, mep.eigenvalue_formula(fam, p.vector)))
    return worst


def verify_system(fam: InnerProductFamily, system: mep.JointSystem, *, rng=0,
                  residual_tol: float = mep.ACCEPT_RESIDUAL,
                  orthogonality_tol: float = ORTHO_TOL) -> list[Check]:
    """All structural checks for one degree."""
    polys = system.polynomials
    return [
        check_count(system),
        check_residuals(system, residual_tol),
        check_real(system),
        check_distinct(system),
        _below("joint orthogonality", joint_orthogonality(fam, polys), orthogonality_tol),
        _below("mutual rank-one", mutual_rank_one(fam, polys), orthogonality_tol),
        _below("rank-one complement",
               rank_one_complement(fam, polys, system.n, rng=rng), orthogonality_tol),
        _below("eigenvalue formula", eigenvalue_angle(fam, system), ANGLE_TOL),
    ]


def below(name: str, value: float, threshold: float, detail: str = "") -> Check:
    """A check that passes when ``value < threshold``."""
    return _below(name, value, threshold, detail)


def render(checks, title: str = "") -> str:
    lines = [title] if title else []
    lines += [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n"
