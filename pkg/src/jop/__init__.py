"""Jointly orthogonal polynomial systems for several weighted intervals."""
from .classical import (HeineStieltjesSpec, HeunSpec, InceSpec, SexticSpec, heine_stieltjes_solve,
                        heun_solve, lame_catalog)
from .errors import JopError
from .forms import InnerProductFamily, deleted_form, rank_one_form
from .measure import IntervalMeasure, moments
from .mep import JointSystem, RectMEP, build, solve
from .poly import Polynomial

__version__ = "0.1.0"

__all__ = [
    "HeineStieltjesSpec", "HeunSpec", "InceSpec", "InnerProductFamily", "IntervalMeasure",
    "JointSystem", "JopError", "Polynomial", "RectMEP", "SexticSpec", "build", "deleted_form",
    "heine_stieltjes_solve", "heun_solve", "lame_catalog", "moments", "rank_one_form", "solve",
]
