import numpy as np
import pytest

from focusfocus.model import build_model
from focusfocus.series import TruncatedSeries2, graded_indices

EPS = 0.4

NAMED_SERIES = {
    "zero": {},
    "X": {(1, 0): 1.0},
    "0.2Y": {(0, 1): 0.2},
    "XY": {(1, 1): 1.0},
    "0.3X+0.1Y": {(1, 0): 0.3, (0, 1): 0.1},
    "0.3X+0.05X2-0.02XY": {(1, 0): 0.3, (2, 0): 0.05, (1, 1): -0.02},
    "0.3X+0.1Y+0.05X2": {(1, 0): 0.3, (0, 1): 0.1, (2, 0): 0.05},
    "0.3X+0.1Y+0.05X2-0.02XY": {(1, 0): 0.3, (0, 1): 0.1, (2, 0): 0.05, (1, 1): -0.02},
}


def named(name, degree=None):
    return TruncatedSeries2.from_dict(NAMED_SERIES[name], degree)


def random_series(rng, max_degree, lo=-0.5, hi=0.5):
    degree = int(rng.integers(1, max_degree + 1))
    return TruncatedSeries2.from_dict({ij: float(rng.uniform(lo, hi)) for ij in graded_indices(degree)}, degree)


def random_corpus(seed, n, max_degree):
    rng = np.random.default_rng(seed)
    return [random_series(rng, max_degree) for _ in range(n)]


def corpus_models():
    models = [build_model(named(n), EPS) for n in NAMED_SERIES]
    models += [build_model(s, EPS) for s in random_corpus(11, 4, 4)]
    return models


def random_value(rng, r_lo, r_hi):
    r = rng.uniform(r_lo, r_hi)
    th = rng.uniform(0.0, 2 * np.pi)
    return complex(r * np.cos(th), r * np.sin(th))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report_line(capsys):
    """Print straight to the terminal, bypassing capture."""

    def emit(line):
        with capsys.disabled():
            print("\n" + line)

    return emit
