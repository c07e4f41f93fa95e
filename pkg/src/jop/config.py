"""Problem configuration files (TOML or JSON) and preset families.

A config names the degree, either ``k`` measure blocks or a preset, and
solver options::

    n = 2
    seed = 7

    [solver]
    max_newton = 50

    [[measure]]
    interval = [0, 1]
    exponents = [[0, 0.5], [1, 0.5]]

    [[measure]]
    interval = [1, "inf"]
    exp_linear = -1.0

Measure keys follow :meth:`jop.measure.IntervalMeasure.from_config`.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import classical
from .errors import ConfigError, JopError
from .forms import InnerProductFamily
from .measure import IntervalMeasure

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PRESETS = ("heun", "lame", "ince", "sextic", "heine-stieltjes")
FORMATS = ("json", "csv")

PRESET_DEFAULTS = {
    "heun": {"e": [0.0, 1.0, 2.0], "a": [0.5, 0.5, 0.5]},
    "lame": {"e": [0.0, 1.0, 2.0], "nu": 2, "eps": [0, 0, 0]},
    "ince": {"alpha": -0.5, "a1": 0.5, "a2": 0.5},
    "sextic": {"ell": 0.0},
    "heine-stieltjes": {},
}


@dataclass
class ProblemConfig:
    n: int
    k: int | None = None
    measures: list = field(default_factory=list)
    seed: int = 0
    residual_tol: float = 1e-9
    orthogonality_tol: float = 1e-8
    max_newton: int = 50
    preset: str | None = None
    params: dict = field(default_factory=dict)
    format: str = "json"

    # -- preset specs -------------------------------------------------------

    def heun_spec(self) -> classical.HeunSpec:
        p = self.params
        return classical.HeunSpec(tuple(p["e"]), tuple(p["a"]), self.n)

    def lame_spec(self) -> classical.HeunSpec:
        """Heun data for one Lamé species; ``n`` is the polynomial degree."""
        p = self.params
        eps = tuple(int(v) for v in p["eps"])
        return classical.HeunSpec(tuple(p["e"]), tuple(v + 0.5 for v in eps), self.n)

    def ince_spec(self) -> classical.InceSpec:
        p = self.params
        return classical.InceSpec(float(p["alpha"]), float(p["a1"]), float(p["a2"]), self.n)

    def sextic_spec(self) -> classical.SexticSpec:
        return classical.SexticSpec(float(self.params["ell"]), self.n)

    def heine_stieltjes_spec(self) -> classical.HeineStieltjesSpec:
        p = self.params
        return classical.HeineStieltjesSpec(tuple(p["e"]), tuple(p["m"]), self.n)

    def spec(self):
        return {
            "heun": self.heun_spec,
            "lame": self.lame_spec,
            "ince": self.ince_spec,
            "sextic": self.sextic_spec,
            "heine-stieltjes": self.heine_stieltjes_spec,
        }[self.preset]()

    def family(self, n_max: int | None = None) -> InnerProductFamily:
        """Interval family of the preset, or of the listed measures."""
        n_max = self.n if n_max is None else n_max
        try:
            if self.preset in ("heun", "lame"):
                s = self.spec()
                return classical.interval_family(s.e, s.a, n_max)
            if self.preset == "heine-stieltjes":
                s = self.spec()
                return classical.interval_family(s.e, s.m, n_max)
            if self.preset == "ince":
                return classical.ince_family(self.spec())
            if self.preset == "sextic":
                return classical.sextic_family(self.spec())
            return InnerProductFamily(self.measures, n_max)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc


def read_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _preset_params(name: str, raw: dict, k: int | None) -> dict:
    params = dict(PRESET_DEFAULTS[name])
    params.update(raw)
    if name == "heine-stieltjes":
        k = int(params.get("k", k or 3))
        params.setdefault("e", [float(i) for i in range(k + 1)])
        params.setdefault("m", [1.0] * len(params["e"]))
        params.pop("k", None)
    return params


def load(data: dict | None = None, *, n=None, k=None, preset=None, seed=None,
         fmt=None) -> ProblemConfig:
    """Validate a parsed config; keyword arguments override file values."""
    data = dict(data or {})
    solver = data.get("solver", {})
    preset_block = data.get("preset", {})
    if isinstance(preset_block, str):
        preset_block = {"name": preset_block}
    name = preset or preset_block.get("name")
    if name is not None and name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")

    n = data.get("n", data.get("n_max")) if n is None else n
    if n is None:
        raise ConfigError("config must set the degree n")
    try:
        n = int(n)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"degree must be an integer, got {n!r}") from exc
    if n < 0:
        raise ConfigError("degree must be >= 0")
    k = data.get("k") if k is None else k

    cfg = ProblemConfig(
        n=n,
        k=None if k is None else int(k),
        seed=int(data.get("seed", 0) if seed is None else seed),
        residual_tol=float(solver.get("residual_tol", 1e-9)),
        orthogonality_tol=float(solver.get("orthogonality_tol", 1e-8)),
        max_newton=int(solver.get("max_newton", 50)),
        preset=name,
        format=str(fmt or data.get("format", "json")),
    )
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {cfg.format!r}")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")

    if name is not None:
        raw = {key: v for key, v in preset_block.items() if key != "name"}
        cfg.params = _preset_params(name, raw, cfg.k)
        try:
            cfg.spec()
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid {name} parameters: {exc}") from exc
        cfg.k = len(cfg.params["e"]) - 1 if name == "heine-stieltjes" else 2
        return cfg

    blocks = data.get("measure", data.get("measures", []))
    if not blocks:
        raise ConfigError("config needs measure blocks or a preset")
    try:
        cfg.measures = [IntervalMeasure.from_config(b) for b in blocks]
    except (JopError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid measure: {exc}") from exc
    if cfg.k is None:
        cfg.k = len(cfg.measures)
    if len(cfg.measures) != cfg.k:
        raise ConfigError(f"k = {cfg.k} but {len(cfg.measures)} measure blocks given")
    ordered = sorted(cfg.measures, key=lambda m: m.lower)
    for a, b in zip(ordered, ordered[1:]):
        if a.upper > b.lower:
            raise ConfigError(
                f"intervals {_fmt_interval(a)} and {_fmt_interval(b)} overlap")
    return cfg


def _fmt_interval(m: IntervalMeasure) -> str:
    def f(v):
        return "inf" if v == math.inf else "-inf" if v == -math.inf else f"{v:g}"
    return f"({f(m.lower)}, {f(m.upper)})"


def load_file(path, **overrides) -> ProblemConfig:
    return load(read_file(path), **overrides)
