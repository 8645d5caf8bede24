"""Randomised properties of the engine."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as P

from ivpquad import ToleranceConfig, load, propagate
from ivpquad.basis import eval_s, eval_u

taus = st.floats(-1.0, 1.0, allow_nan=False)
coeffs = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=13)


@given(st.integers(0, 30), taus)
def test_s_matches_series_integral(mu, tau):
    c = np.zeros(mu + 1)
    c[mu] = 1.0
    want = npleg.legval(tau, npleg.legint(c, lbnd=-1))
    assert abs(eval_s(mu, tau) - want) <= 1e-12


@given(st.integers(0, 30), taus)
def test_u_matches_series_integral(mu, tau):
    c = np.zeros(mu + 1)
    c[mu] = 1.0
    want = npleg.legval(tau, npleg.legint(c, 2, lbnd=-1))
    assert abs(eval_u(mu, tau) - want) <= 1e-12


@settings(deadline=None, max_examples=60)
@given(coeffs, st.floats(-5, 5), st.floats(0.01, 6.0))
def test_polynomials_integrate_exactly(c, a, length):
    # degree <= M - 1 = 12
    b = a + length
    f = lambda x: P.polyval(x, c)
    sol = propagate(f, a, 0.0, b)
    prim = P.polyint(c)
    want = P.polyval(b, prim) - P.polyval(a, prim)
    scale = max(abs(want), sum(abs(v) * max(abs(a), abs(b)) ** k * length
                               for k, v in enumerate(c)), 1e-300)
    assert abs(sol.value - want) <= 1e-12 * scale


@settings(deadline=None, max_examples=25)
@given(st.floats(0.2, 5.0), st.floats(0.1, 3.0), st.booleans())
def test_counts_and_continuity(k, b, singular):
    calls = {"n": 0}

    def f(x):
        calls["n"] += np.size(x)
        return np.cos(k * x) * np.exp(-x)

    cfg = ToleranceConfig()
    sol = propagate(f, 0.0, 0.0, b, cfg, singular_start=singular, trace=True)
    st_ = sol.stats
    assert calls["n"] == st_.n_evals == (0 if singular else 1) + 14 * st_.n_attempts
    for left, right, t in zip(sol.elements, sol.elements[1:], st_.trace):
        assert right.y_left == left.y_right
        if not t["forced"]:
            assert abs(left.slope_right - right.f_left) <= t["tol"]


@settings(deadline=None, max_examples=15,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.floats(0.5, 4.0), st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_dump_round_trip(tmp_path, b, fractions):
    sol = propagate(lambda x: np.sqrt(x + 1.0), 0.0, 1.0, b)
    path = tmp_path / "r.json"
    sol.save(path)
    back = load(path)
    for fr in fractions:
        x = fr * b
        assert back.eval(x) == sol.eval(x)
        assert back.eval_derivative(x) == sol.eval_derivative(x)
