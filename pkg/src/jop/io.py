"""Serialization of joint systems and ledgers.

Floats are written as 17-significant-digit strings so that files round-trip
64-bit values exactly and identical inputs give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import mep
from .errors import ConfigError
from .forms import InnerProductFamily
from .poly import Polynomial

SCHEMA = 1


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _fmt_interval(v):
    return fmt(v)


def system_to_dict(system: mep.JointSystem, *, seed=None, preset=None) -> dict:
    fam = system.family
    pairs = []
    for i, p in enumerate(system):
        entry = {
            "index": i,
            "coefficients": [fmt(c) for c in p.vector.coeffs],
            "lambda": [fmt(v) for v in np.real(p.lam)],
            "residual": fmt(p.residual),
            "signature": list(p.signature) if p.signature is not None else None,
        }
        if p.spectral is not None:
            entry["spectral"] = fmt(p.spectral)
        pairs.append(entry)
    out = {
        "schema": SCHEMA,
        "k": system.k,
        "n": system.n,
        "count": len(system),
        "expected_count": system.expected_count,
        "min_angle": fmt(system.min_angle),
        "max_orthogonality": fmt(system.max_orthogonality),
        "pairs": pairs,
    }
    if fam is not None:
        out["intervals"] = [[_fmt_interval(lo), _fmt_interval(hi)] for lo, hi in fam.intervals]
    if seed is not None:
        out["seed"] = int(seed)
    if preset is not None:
        out["preset"] = preset
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_system(path, system: mep.JointSystem, **meta) -> Path:
    path = Path(path)
    path.write_text(dumps(system_to_dict(system, **meta)))
    return path


def read_system(path, fam: InnerProductFamily) -> mep.JointSystem:
    """Load a system file and recompute residuals and certificates against ``fam``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read system file {path}: {exc}") from exc
    return system_from_dict(data, fam)


def system_from_dict(data: dict, fam: InnerProductFamily) -> mep.JointSystem:
    if data.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported system schema {data.get('schema')!r}")
    n, k = int(data["n"]), int(data["k"])
    if k != fam.k:
        raise ConfigError(f"system has k = {k} but the config family has k = {fam.k}")
    problem = mep.build(fam, n)
    pairs = []
    for entry in data["pairs"]:
        v = Polynomial([float(c) for c in entry["coefficients"]])
        lam = np.array([float(c) for c in entry["lambda"]])
        pairs.append(mep.Eigenpair(v, lam, problem.residual(v, lam)))
    return mep.assemble(problem, pairs, fam)


def system_csv(system: mep.JointSystem) -> str:
    """One row per eigenpair: index, signature, lambda components, coefficients."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "signature"] + [f"lambda_{j + 1}" for j in range(system.k)]
               + [f"c_{s}" for s in range(system.n + 1)] + ["residual"])
    for i, p in enumerate(system):
        sig = "-".join(str(s) for s in p.signature) if p.signature is not None else ""
        w.writerow([i, sig] + [fmt(v) for v in np.real(p.lam)]
                   + [fmt(c) for c in p.vector.padded(system.n + 1)] + [fmt(p.residual)])
    return buf.getvalue()


def table_csv(columns: dict) -> str:
    """Columns of equal length as CSV, in insertion order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(names)
    for row in zip(*(columns[c] for c in names)):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()
