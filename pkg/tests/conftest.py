import numpy as np
import pytest


class CountingIntegrand:
    """Wraps an array integrand and counts the abscissas it was asked for."""

    def __init__(self, f):
        self.f = f
        self.count = 0
        self.calls = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        self.count += x.size
        self.calls += 1
        return self.f(x)


@pytest.fixture
def counting():
    return CountingIntegrand


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
