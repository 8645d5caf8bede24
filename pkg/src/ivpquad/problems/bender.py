"""The nonlinear initial value problem ``y' = cos(pi x y)``.

Each element is solved by fixed-point iteration: the integrand is evaluated
at the nodes with ``y`` reconstructed from the current coefficients, the
collocation system is re-solved, and the loop repeats until the
coefficients settle. The first element starts from all-ones coefficients,
later ones from the previous element's converged coefficients.
"""
import math

import numpy as np

from .. import kernels
from ..collocation import build_system
from ..errors import ConfigurationError
from ..propagator import Element, ToleranceConfig, propagate

DELTA_REL = 3.0e-9
TOL_ITER = 1e-14
MAX_ITER = 200
# a contraction factor above this makes the next element smaller
CONTRACTION_TARGET = 0.25

# y(24) as published for y(0) = 1..10
TABLE2 = {
    1: 0.0208448654190153,
    2: 0.104224327270128,
    3: 0.270983253633302,
    4: 0.437742187280245,
    5: 0.687880611222152,
    6: 0.938019076811230,
    7: 1.27153712200293,
    8: 1.68843487581057,
    9: 2.10533291540323,
    10: 2.60561104167666,
}


def bender_rhs(x, y):
    return np.cos(np.pi * x * y)


def default_config(**changes):
    cfg = ToleranceConfig(delta_rel=DELTA_REL)
    return cfg.replace(**changes) if changes else cfg


class BenderStepper:
    """Element solver for ``y' = cos(pi x y)`` used by :func:`propagate`."""

    singular_start = False

    def __init__(self, system, tol_iter=TOL_ITER, max_iter=MAX_ITER, y0=0.0):
        self.system = system
        self.tol_iter = tol_iter
        self.max_iter = max_iter
        self.y0 = float(y0)
        self.n_evals = 0
        self.n_iterations = 0
        self.n_failed = 0
        self.seed = np.ones(system.M)
        self._rate = 0.0

    def start(self, a):
        self.n_evals += 1
        return math.cos(math.pi * a * self.y0)

    def attempt(self, x_left, q, y_left, f_left, x_right, first):
        sys_ = self.system
        B, iters, ok, rate, _ = kernels.picard_cos_element(
            sys_.U, sys_.S0, sys_.lu, sys_.piv, sys_.nodes, x_left, q, y_left,
            f_left, self.seed, self.tol_iter, self.max_iter)
        self.n_evals += iters * sys_.M + 1
        self.n_iterations += iters
        if not ok:
            self.n_failed += 1
            return None, math.nan
        el = Element(x_left, q, B, f_left, y_left)
        y_right = el.y_right
        f_right = math.cos(math.pi * x_right * y_right)
        self._rate = rate
        return el, f_right

    def accepted(self, element):
        self.seed = np.array(element.B, copy=True)

    def step_hint(self, element, q_next):
        # slow contraction means the next element should be smaller
        if self._rate > CONTRACTION_TARGET:
            q_next = min(q_next, element.q * CONTRACTION_TARGET / self._rate)
        return q_next


def solve_bender(y0, x_max, config=None, *, tol_iter=TOL_ITER, max_iter=MAX_ITER,
                 trace=False):
    """Propagate ``y' = cos(pi x y)``, ``y(0) = y0`` to ``x_max``."""
    if not x_max > 0:
        raise ConfigurationError("x_max must be positive")
    if not math.isfinite(y0):
        raise ConfigurationError("y0 must be finite")
    config = config or default_config()
    stepper = BenderStepper(build_system(config.M), tol_iter, max_iter, y0)
    return propagate(None, 0.0, float(y0), float(x_max), config,
                     stepper=stepper, trace=trace)
