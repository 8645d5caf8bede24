import math

import numpy as np
import pytest

from ivpquad import ToleranceConfig
from ivpquad.errors import ConfigurationError
from ivpquad.problems import bender
from ivpquad.propagator import end_tolerance


@pytest.fixture(scope="module")
def short_runs():
    return {y0: bender.solve_bender(y0, 4.0) for y0 in range(1, 11)}


def test_short_range_finite_and_ordered(short_runs):
    values = [short_runs[y0].value for y0 in range(1, 11)]
    assert all(math.isfinite(v) for v in values)
    assert all(a < b for a, b in zip(values, values[1:]))


def test_residual_at_dense_points(short_runs):
    # y' - cos(pi x y) at points inside the elements
    sol = short_runs[3]
    xs = np.linspace(0.01, 3.99, 97)
    res = [sol.eval_derivative(x) - math.cos(math.pi * x * sol.eval(x)) for x in xs]
    assert max(abs(r) for r in res) < 1e-6


def test_element_chain(short_runs):
    sol = short_runs[5]
    for a, b in zip(sol.elements, sol.elements[1:]):
        assert b.y_left == a.y_right
        f = math.cos(math.pi * b.x_left * b.y_left)
        assert b.f_left == f


def test_counts_reconcile():
    sol = bender.solve_bender(2.0, 2.0)
    st = sol.stats
    assert st.n_evals == 1 + 13 * st.n_iterations + st.n_attempts


def test_y0_zero_small_x():
    # y' = cos(pi x y) with y(0) = 0 starts like y = x
    sol = bender.solve_bender(0.0, 0.01)
    assert sol.value == pytest.approx(0.01, rel=1e-5)


def test_iteration_stops_at_rounding_floor():
    # near x = 17, y = 3.6 the update norms bottom out close to 1e-14
    from ivpquad import kernels
    s = bender.build_system(13)
    args = (s.U, s.S0, s.lu, s.piv, s.nodes, 17.0, 0.015, 3.6,
            math.cos(math.pi * 17 * 3.6), np.ones(13))
    B, iters, ok, rate, last = kernels.picard_cos_element(*args, bender.TOL_ITER, 200)
    assert ok and iters < 30
    assert 0.0 < rate < 1.0
    # a threshold below the floor ends quickly either way: an exact float
    # fixed point (update 0) or a reported failure, never a spin to max_iter
    B, iters, ok, rate, last = kernels.picard_cos_element(*args, 1e-18, 200)
    assert iters < 60
    assert (ok and last == 0.0) or not ok


def test_first_element_seed_is_ones():
    st = bender.BenderStepper(bender.build_system(13))
    assert np.array_equal(st.seed, np.ones(13))


def test_nonconvergent_iteration_bisects():
    cfg = bender.default_config()
    sol = bender.solve_bender(10.0, 1.0, cfg, max_iter=3)
    assert sol.stats.n_bisections > 0
    ref = bender.solve_bender(10.0, 1.0, cfg)
    assert sol.value == pytest.approx(ref.value, abs=1e-10)


def test_validation():
    with pytest.raises(ConfigurationError):
        bender.solve_bender(1.0, 0.0)
    with pytest.raises(ConfigurationError):
        bender.solve_bender(math.inf, 1.0)


@pytest.mark.parametrize("y0", [1, 10])
def test_table_values(y0):
    sol = bender.solve_bender(y0, 24.0)
    assert abs(sol.value - bender.TABLE2[y0]) <= 1e-8


def test_default_config():
    assert bender.default_config().delta_rel == 3e-9
    assert bender.default_config(M=15).M == 15
