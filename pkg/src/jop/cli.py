"""Command line front end.

Exit codes: 0 success, 2 invalid configuration, 3 incomplete system,
4 failed residual or verification check.  Set ``JOP_LOG`` to ``error``,
``info`` or ``debug`` for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import classical, config, gs, io, mep, verify
from .errors import (CholeskyFailure, ConfigError, IncompleteSystem, JopError, NonIntegrable,
                     OverlappingIntervals, UnsupportedDimension)

log = logging.getLogger("jop")

EXIT_OK, EXIT_CONFIG, EXIT_INCOMPLETE, EXIT_CHECK = 0, 2, 3, 4
CONFIG_ERRORS = (ConfigError, NonIntegrable, OverlappingIntervals, UnsupportedDimension,
                 CholeskyFailure)
ODE_TOL = 1e-7
SELFADJOINT_TOL = 1e-8
CROSS_TOL = 1e-7


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="problem file (.toml or .json)")
    common.add_argument("--seed", type=int, help="seed for the solver's random choices")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=config.FORMATS, help="tabular output format")
    common.add_argument("--n", type=int, help="degree (largest degree for gs)")
    common.add_argument("--k", type=int, help="number of intervals")
    common.add_argument("--preset", choices=config.PRESETS, help="classical family")

    parser = argparse.ArgumentParser(
        prog="jop", description="Jointly orthogonal polynomial systems on k intervals.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve one degree, write system.json")
    p = sub.add_parser("verify", parents=[common], help="re-check a written system")
    p.add_argument("--system", type=Path, help="system file (default OUT/system.json)")
    sub.add_parser("gs", parents=[common], help="degree-by-degree Gram-Schmidt ledger")
    sub.add_parser("classical", parents=[common], help="run a preset and its ODE checks")
    sub.add_parser("appendix-b", parents=[common], help="closed-form template eigenpairs")
    sub.add_parser("plotdata", parents=[common], help="basis values on a grid as CSV")
    return parser


def _setup_logging():
    level = os.environ.get("JOP_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _config(args) -> config.ProblemConfig:
    data = config.read_file(args.config) if args.config else {}
    return config.load(data, n=args.n, k=args.k, preset=args.preset, seed=args.seed,
                       fmt=args.format)


def _header(cfg: config.ProblemConfig, fam) -> list[str]:
    lines = [f"k = {fam.k}, n = {cfg.n}, seed = {cfg.seed}"]
    if cfg.preset:
        lines.append(f"preset = {cfg.preset} {json.dumps(cfg.params, sort_keys=True)}")
    for j, (lo, hi) in enumerate(fam.intervals, 1):
        lines.append(f"interval {j}: ({io.fmt(lo)}, {io.fmt(hi)})")
    return lines


def _write(path: Path, text: str):
    path.write_text(text)
    log.info("wrote %s", path)


# -- commands ---------------------------------------------------------------------

def cmd_solve(args, out: Path) -> int:
    cfg = _config(args)
    fam = cfg.family()
    lines = _header(cfg, fam)
    try:
        system = mep.solve(fam, cfg.n, seed=cfg.seed, max_iter=cfg.max_newton)
    except IncompleteSystem as exc:
        partial = getattr(exc, "system", None)
        if partial is not None:
            io.write_system(out / "system.json", partial, seed=cfg.seed, preset=cfg.preset)
        lines.append(f"incomplete system: {exc}")
        _write(out / "report.txt", "\n".join(lines) + "\n")
        print(f"incomplete system: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE

    checks = verify.verify_system(fam, system, rng=cfg.seed, residual_tol=cfg.residual_tol,
                                  orthogonality_tol=cfg.orthogonality_tol)
    io.write_system(out / "system.json", system, seed=cfg.seed, preset=cfg.preset)
    if cfg.format == "csv":
        _write(out / "system.csv", io.system_csv(system))
    lines += [
        f"eigenpairs: {len(system)} (expected {system.expected_count})",
        f"min eigenvalue-ray angle: {system.min_angle:.6e}",
        f"max orthogonality residual: {system.max_orthogonality:.3e}",
        "",
    ]
    report = "\n".join(lines) + "\n" + verify.render(checks)
    _write(out / "report.txt", report)
    print(report, end="")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def _preset_checks(cfg: config.ProblemConfig, system: mep.JointSystem) -> list:
    """ODE residuals of the preset wave functions or Van Vleck equations."""
    if cfg.preset == "ince":
        spec = cfg.ince_spec()
        return [verify.below("Ince ODE residual", classical.ince_check(spec, system), ODE_TOL)]
    if cfg.preset == "sextic":
        spec = cfg.sextic_spec()
        return [verify.below("sextic ODE residual", classical.sextic_check(spec, system),
                             ODE_TOL)]
    if cfg.preset == "heine-stieltjes":
        spec = cfg.heine_stieltjes_spec()
        worst = 0.0
        for E in system.polynomials:
            worst = max(worst, classical.heine_stieltjes_residual(
                spec, E, classical.van_vleck(spec, E)))
        return [verify.below("Van Vleck ODE residual", worst, ODE_TOL)]
    if cfg.preset in ("heun", "lame"):
        spec = cfg.spec()
        ref = classical.heun_solve(spec)
        return [verify.below("operator cross-check", _coefficient_gap(ref, system), CROSS_TOL)]
    return []


def _coefficient_gap(a: mep.JointSystem, b: mep.JointSystem) -> float:
    if len(a) != len(b):
        return math.inf
    gap = 0.0
    for p, q in zip(a.polynomials, b.polynomials):
        n = max(p.degree or 0, q.degree or 0) + 1
        gap = max(gap, float(np.max(np.abs(p.padded(n) - q.padded(n)))))
    return gap


def cmd_verify(args, out: Path) -> int:
    cfg = _config(args)
    fam = cfg.family()
    path = args.system or out / "system.json"
    system = io.read_system(path, fam)
    checks = verify.verify_system(fam, system, rng=cfg.seed, residual_tol=cfg.residual_tol,
                                  orthogonality_tol=cfg.orthogonality_tol)
    try:
        checks += _preset_checks(cfg, system)
    except JopError as exc:
        checks.append(verify.Check("preset ODE check", math.inf, ODE_TOL, False, str(exc)))
    report = verify.render(checks, title=f"verify {path}")
    _write(out / "verify.txt", report)
    print(report, end="")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def cmd_gs(args, out: Path) -> int:
    cfg = _config(args)
    fam = cfg.family(n_max=cfg.n)
    ledger = gs.gs_drive(fam, cfg.n, seed=cfg.seed, tol=cfg.orthogonality_tol)
    lines = _header(cfg, fam)
    ok = True
    degrees = []
    for n in sorted(ledger.systems):
        system = ledger.systems[n]
        r = ledger.max_residual(n)
        good = len(system) == system.expected_count and r <= cfg.orthogonality_tol
        ok &= good
        lines.append(f"degree {n}: {len(system)} members, max GS residual {r:.3e} "
                     f"{'PASS' if good else 'FAIL'}")
        degrees.append({"n": n, "max_residual": io.fmt(r),
                        "system": io.system_to_dict(system)})
    _write(out / "ledger.json", io.dumps({"schema": io.SCHEMA, "k": fam.k, "n_max": cfg.n,
                                          "seed": cfg.seed, "degrees": degrees}))
    report = "\n".join(lines) + f"\noverall: {'PASS' if ok else 'FAIL'}\n"
    _write(out / "gs_report.txt", report)
    print(report, end="")
    return EXIT_OK if ok else EXIT_CHECK


def _selfadjoint_checks(fam, opmatrix) -> list:
    return [verify.below(f"self-adjoint j={j}",
                         classical.selfadjointness_residual(fam, opmatrix, j), SELFADJOINT_TOL)
            for j in range(1, fam.k + 1)]


def cmd_classical(args, out: Path) -> int:
    cfg = _config(args)
    if cfg.preset is None:
        raise ConfigError("classical needs a preset")
    lines = [f"preset = {cfg.preset} {json.dumps(cfg.params, sort_keys=True)}, n = {cfg.n}"]
    checks = []
    if cfg.preset == "heun":
        spec = cfg.heun_spec()
        fam = classical.heun_family(spec)
        ref = classical.heun_solve(spec)
        pencil = mep.solve_k2(mep.build(fam, spec.n))
        checks += _selfadjoint_checks(fam, classical.heun_operator(spec))
        checks.append(verify.below("pencil cross-check", _coefficient_gap(ref, pencil),
                                   CROSS_TOL))
        lines.append("operator eigenvalues: "
                     + ", ".join(f"{p.spectral:.12g}" for p in ref))
    elif cfg.preset == "lame":
        e, nu = tuple(cfg.params["e"]), int(cfg.params["nu"])
        cat = classical.lame_catalog(e, nu)
        worst = max(classical.lame_residual(e, nu, s) for s in cat)
        checks.append(verify.Check("Lame census", len(cat), 2 * nu + 1, len(cat) == 2 * nu + 1,
                                   f"{len(cat)} solutions for nu = {nu}"))
        checks.append(verify.below("Lame ODE residual", worst, ODE_TOL))
        for s in cat:
            lines.append(f"species {s.eps} n={s.n}: {list(np.round(s.polynomial.coeffs, 12))}")
    elif cfg.preset == "ince":
        spec = cfg.ince_spec()
        fam = classical.ince_family(spec)
        system = mep.solve(fam, spec.n, seed=cfg.seed)
        classes = classical.ince_periodicity(spec, system)
        expected = classical.ince_expected_class(spec)
        checks += _selfadjoint_checks(fam, classical.ince_operator(spec))
        checks += _preset_checks(cfg, system)
        bad = sum(c != expected for c in classes)
        checks.append(verify.Check("Ince periodicity", bad, 1, bad == 0,
                                   f"nu = {spec.nu}: {expected}"))
    elif cfg.preset == "sextic":
        spec = cfg.sextic_spec()
        fam = classical.sextic_family(spec)
        system = mep.solve(fam, spec.n, seed=cfg.seed)
        checks += _selfadjoint_checks(fam, classical.sextic_operator(spec))
        checks += _preset_checks(cfg, system)
    else:
        spec = cfg.heine_stieltjes_spec()
        fam = classical.heine_stieltjes_family(spec)
        res = classical.heine_stieltjes_solve(spec, seed=cfg.seed)
        checks += _selfadjoint_checks(fam, classical.heine_stieltjes_operator(spec))
        checks.append(verify.below("Van Vleck ODE residual", res.max_ode_residual, ODE_TOL))
        lead = spec.van_vleck_leading
        gap = max((abs(V.leading - lead) / abs(lead) for V in res.van_vleck if lead), default=0.0)
        checks.append(verify.below("Van Vleck leading coeff", gap, 1e-8))
        sigs = {p.signature for p in res.system}
        checks.append(verify.Check("distinct signatures", len(sigs), len(res.system),
                                   len(sigs) == len(res.system)))
    report = "\n".join(lines) + "\n" + verify.render(checks)
    _write(out / "classical.txt", report)
    print(report, end="")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def cmd_roots_of_unity(args, out: Path) -> int:
    if args.config:
        cfg = _config(args)
        n, k = cfg.n, cfg.k
    else:
        n, k = args.n, args.k
    if n is None or k is None or n < 0 or k < 2:
        raise ConfigError("appendix-b needs --n >= 0 and --k >= 2")
    pairs = mep.roots_of_unity_pairs(n, k)
    lines = [f"closed-form template pairs, n = {n}, k = {k}: {len(pairs)} "
             f"(expected {math.comb(n + k - 1, k - 1)})"]
    for choice, p in pairs:
        lam = ", ".join(_cfmt(v) for v in p.lam)
        vec = ", ".join(_cfmt(v) for v in p.vector)
        tag = " complex" if p.is_complex else ""
        lines.append(f"roots {list(choice)}: lambda = [{lam}]  v = [{vec}]  "
                     f"residual {p.residual:.2e}{tag}")
    worst = max(p.residual for _, p in pairs)
    angles = [mep.ray_angle(a.lam, b.lam) for (_, a), (_, b) in itertools.combinations(pairs, 2)]
    distinct = min(angles, default=math.pi / 2) > mep.TAU_DUP
    if k == 2:
        lines.append("k = 2: each v is a discrete Fourier vector (zeta^(j+1))_j")
    ok = worst < 1e-12 and distinct and len(pairs) == math.comb(n + k - 1, k - 1)
    lines.append(f"max residual {worst:.2e}; eigenvalues distinct: {distinct}")
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    report = "\n".join(lines) + "\n"
    _write(out / "appendix_b.txt", report)
    print(report, end="")
    return EXIT_OK if ok else EXIT_CHECK


def _cfmt(z) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-15:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _grid(lo: float, hi: float, count: int = 101) -> np.ndarray:
    a, b = mep._seed_window(lo, hi)
    return np.linspace(a, b, count)


def cmd_plotdata(args, out: Path) -> int:
    cfg = _config(args)
    fmt = args.format or "csv"
    fam = cfg.family()
    system = mep.solve(fam, cfg.n, seed=cfg.seed, max_iter=cfg.max_newton)
    x = np.concatenate([_grid(lo, hi) for lo, hi in fam.intervals])
    cols = {"x": x}
    for i, E in enumerate(system.polynomials, 1):
        cols[f"E_{i}"] = E(x)
    tables = {"plot": cols}
    if cfg.preset == "ince":
        spec = cfg.ince_spec()
        t = np.linspace(0.0, np.pi, 181)
        psi = {"theta": t}
        for i, E in enumerate(system.polynomials, 1):
            psi[f"psi_{i}"] = classical.ince_wavefunction(spec, E, t)[0]
        tables["psi"] = psi
    elif cfg.preset == "sextic":
        spec = cfg.sextic_spec()
        r = np.linspace(0.01, 3.0, 150)
        psi = {"r": r}
        for i, E in enumerate(system.polynomials, 1):
            psi[f"psi_{i}"] = classical.sextic_wavefunction(spec, E, r)[0]
        tables["psi"] = psi
    for name, table in tables.items():
        if fmt == "csv":
            _write(out / f"{name}.csv", io.table_csv(table))
        else:
            _write(out / f"{name}.json",
                   io.dumps({key: [io.fmt(v) for v in col] for key, col in table.items()}))
    print(f"wrote {', '.join(f'{name}.{fmt}' for name in tables)} "
          f"({len(system)} basis functions)")
    return EXIT_OK


COMMANDS = {
    "solve": (cmd_solve, "report.txt"),
    "verify": (cmd_verify, "verify.txt"),
    "gs": (cmd_gs, "gs_report.txt"),
    "classical": (cmd_classical, "classical.txt"),
    "appendix-b": (cmd_roots_of_unity, "appendix_b.txt"),
    "plotdata": (cmd_plotdata, "plotdata.txt"),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    func, report = COMMANDS[args.command]
    try:
        return func(args, out)
    except CONFIG_ERRORS as exc:
        code, msg = EXIT_CONFIG, f"config error: {exc}"
    except IncompleteSystem as exc:
        code, msg = EXIT_INCOMPLETE, f"incomplete system: {exc}"
    except JopError as exc:
        code, msg = EXIT_CHECK, f"{type(exc).__name__}: {exc}"
    print(msg, file=sys.stderr)
    _write(out / report, msg + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
