import math

import mpmath
import numpy as np
import pytest

from ivpquad import propagate
from ivpquad.problems import corpus

PROBLEMS = corpus.corpus()


def test_fifteen_rows_in_order():
    assert [p.id for p in PROBLEMS] == list(range(1, 16))
    assert {p.id for p in PROBLEMS if p.smooth} == {1, 2, 3, 4, 11, 14}
    with pytest.raises(KeyError):
        corpus.get(16)


@pytest.mark.parametrize("p", PROBLEMS, ids=lambda p: f"#{p.id}")
def test_reference_against_mpmath_quadrature(p):
    # independent oracle: mpmath tanh-sinh on the same integrand
    mpmath.mp.dps = 30
    f = {
        1: lambda t: t * mpmath.log(1 + t),
        2: lambda t: t * t * mpmath.atan(t),
        3: lambda t: mpmath.exp(t) * mpmath.cos(t),
        4: lambda t: mpmath.atan(mpmath.sqrt(2 + t * t)) / ((1 + t * t) * mpmath.sqrt(2 + t * t)),
        5: lambda t: mpmath.sqrt(t) * mpmath.log(t),
        6: lambda t: mpmath.sqrt(1 - t * t),
        7: lambda t: mpmath.sqrt(t) / mpmath.sqrt(1 - t * t),
        8: lambda t: mpmath.log(t) ** 2,
        9: lambda t: mpmath.log(mpmath.cos(t)),
        10: lambda t: mpmath.sqrt(mpmath.tan(t)),
        11: lambda t: 1 / (1 + t * t),
        12: lambda t: mpmath.exp(-t) / mpmath.sqrt(t),
        13: lambda t: mpmath.exp(-t * t / 2),
        14: lambda t: mpmath.exp(-t) * mpmath.cos(t),
        15: lambda t: 1 / mpmath.sqrt(1 - t * t),
    }[p.id]
    upper = mpmath.inf if p.b is None else (mpmath.pi / 2 if p.b == corpus.HALF_PI else p.b)
    want = mpmath.quad(f, [p.a, upper])
    assert p.reference_value == pytest.approx(float(want), rel=1e-15, abs=1e-16)


@pytest.mark.parametrize("p", PROBLEMS, ids=lambda p: f"#{p.id}")
def test_integrand_matches_mpmath(p):
    xs = np.array([0.1, 0.37, 0.8]) * (1.0 if p.b is None else p.b)
    vals = p.integrand(xs)
    assert vals.shape == xs.shape and np.all(np.isfinite(vals))


@pytest.mark.parametrize("p", PROBLEMS, ids=lambda p: f"#{p.id}")
def test_published_values_close_to_reference(p):
    value, n = corpus.PUBLISHED[p.id]
    assert n > 0
    assert abs(value - p.reference_value) <= 1e-8 * abs(p.reference_value)


def test_examples():
    one = corpus.get(1)
    assert propagate(one.integrand, one.a, 0.0, one.b).value == pytest.approx(0.25, abs=1e-15)
    six = corpus.get(6)
    assert six.reference_value == math.pi / 4
    eight = corpus.get(8)
    sol = propagate(eight.integrand, 0.0, 0.0, 1.0, singular_start=True)
    assert sol.value == pytest.approx(2.0, rel=1e-14)
