import math

import numpy as np
import pytest
from hypothesis import settings

from jop.forms import InnerProductFamily
from jop.measure import IntervalMeasure

settings.register_profile("jop", deadline=None, max_examples=40)
settings.load_profile("jop")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def unit_pair():
    """k = 2: (-2, -1) and (1, 2) with unit weight."""
    return InnerProductFamily([IntervalMeasure(-2, -1), IntervalMeasure(1, 2)], 6)


@pytest.fixture(scope="session")
def three_intervals():
    """k = 3 Heine-Stieltjes family on (0,1), (1,2), (2,3) with m_j = 1."""
    return InnerProductFamily([IntervalMeasure(0, 1), IntervalMeasure(1, 2),
                               IntervalMeasure(2, 3)], 4)


@pytest.fixture(scope="session")
def singular_three():
    f = ((0.0, -0.5), (1.0, 0.5), (2.0, -0.5), (3.0, 0.25))
    return InnerProductFamily([IntervalMeasure(0, 1, singular_factors=f),
                               IntervalMeasure(1, 2, singular_factors=f),
                               IntervalMeasure(2, 3, singular_factors=f)], 4)


def family(k, n_max=4, gap=0.0):
    """``k`` adjacent unit intervals starting at 0, optionally separated by ``gap``."""
    return InnerProductFamily(
        [IntervalMeasure(i * (1 + gap), i * (1 + gap) + 1) for i in range(k)], n_max)


def angle(a, b):
    a = np.asarray(a) / np.linalg.norm(a)
    b = np.asarray(b) / np.linalg.norm(b)
    return math.acos(min(1.0, abs(float(a @ b))))
