"""Fifteen closed test integrals (Bailey, Jeyabalan and Li's test set).

Infinite ranges are propagated as open integrals. Integrands that cannot be
evaluated at the lower limit use the singular first element.
"""
import math
from dataclasses import dataclass, field

import numpy as np

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class ProblemSpec:
    id: int
    name: str
    integrand: object = field(repr=False)
    a: float
    b: float | None
    reference_value: float
    provenance: str
    singular_start: bool = False
    smooth: bool = True

    @property
    def open(self):
        return self.b is None


def _np(fn):
    def wrapped(x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(np.asarray(x, dtype=float))
    wrapped.__name__ = fn.__name__
    return wrapped


@_np
def _f1(t):
    return t * np.log1p(t)


@_np
def _f2(t):
    return t * t * np.arctan(t)


@_np
def _f3(t):
    return np.exp(t) * np.cos(t)


@_np
def _f4(t):
    r = np.sqrt(2.0 + t * t)
    return np.arctan(r) / ((1.0 + t * t) * r)


@_np
def _f5(t):
    return np.sqrt(t) * np.log(t)


@_np
def _f6(t):
    return np.sqrt(1.0 - t * t)


@_np
def _f7(t):
    return np.sqrt(t) / np.sqrt(1.0 - t * t)


@_np
def _f8(t):
    return np.log(t) ** 2


@_np
def _f9(t):
    return np.log(np.cos(t))


@_np
def _f10(t):
    return np.sqrt(np.tan(t))


@_np
def _f11(t):
    return 1.0 / (1.0 + t * t)


@_np
def _f12(t):
    return np.exp(-t) / np.sqrt(t)


@_np
def _f13(t):
    return np.exp(-0.5 * t * t)


@_np
def _f14(t):
    return np.exp(-t) * np.cos(t)


@_np
def _f15(t):
    return 1.0 / np.sqrt(1.0 - t * t)


_ROWS = [
    (1, "t log(1+t)", _f1, 0.0, 1.0, 0.25, "analytic: 1/4", False, True),
    (2, "t^2 arctan t", _f2, 0.0, 1.0,
     (math.pi - 2.0 + 2.0 * math.log(2.0)) / 12.0,
     "analytic: (pi - 2 + 2 log 2)/12", False, True),
    (3, "e^t cos t", _f3, 0.0, HALF_PI, (math.exp(HALF_PI) - 1.0) / 2.0,
     "analytic: (e^(pi/2) - 1)/2", False, True),
    (4, "arctan(sqrt(2+t^2))/((1+t^2) sqrt(2+t^2))", _f4, 0.0, 1.0,
     5.0 * math.pi ** 2 / 96.0, "analytic: 5 pi^2/96", False, True),
    (5, "sqrt(t) log t", _f5, 0.0, 1.0, -4.0 / 9.0, "analytic: -4/9", True, False),
    (6, "sqrt(1-t^2)", _f6, 0.0, 1.0, math.pi / 4.0, "analytic: pi/4", False, False),
    (7, "sqrt(t)/sqrt(1-t^2)", _f7, 0.0, 1.0,
     2.0 * math.sqrt(math.pi) * math.gamma(0.75) / math.gamma(0.25),
     "analytic: 2 sqrt(pi) Gamma(3/4)/Gamma(1/4)", False, False),
    (8, "log(t)^2", _f8, 0.0, 1.0, 2.0, "analytic: 2", True, False),
    (9, "log(cos t)", _f9, 0.0, HALF_PI, -math.pi * math.log(2.0) / 2.0,
     "analytic: -pi log(2)/2", False, False),
    (10, "sqrt(tan t)", _f10, 0.0, HALF_PI, math.pi * math.sqrt(2.0) / 2.0,
     "analytic: pi sqrt(2)/2", False, False),
    (11, "1/(1+t^2)", _f11, 0.0, None, HALF_PI, "analytic: pi/2", False, True),
    (12, "e^-t/sqrt(t)", _f12, 0.0, None, math.sqrt(math.pi),
     "analytic: sqrt(pi)", True, False),
    (13, "e^(-t^2/2)", _f13, 0.0, None, math.sqrt(HALF_PI),
     "analytic: sqrt(pi/2)", False, False),
    (14, "e^-t cos t", _f14, 0.0, None, 0.5, "analytic: 1/2", False, True),
    (15, "1/sqrt(1-t^2)", _f15, 0.0, 1.0, HALF_PI, "analytic: pi/2", False, False),
]

# Values printed for the same rows by the original study, for side-by-side
# reporting only.
PUBLISHED = {
    1: (0.250000000000000, 29),
    2: (0.210657251225807, 29),
    3: (1.90523869048268, 191),
    4: (0.514041895890071, 29),
    5: (-0.444444444444445, 871),
    6: (0.785398163397448, 974),
    7: (1.19814022714281, 2129),
    8: (1.99999999999998, 922),
    9: (-1.08879304515179, 1243),
    10: (2.22144145467265, 2032),
    11: (1.57079632679490, 29),
    12: (1.77245384016893, 2439),
    13: (1.25331413731562, 96),
    14: (0.500000000000001, 231),
    15: (1.57079632679490, 1523),
}


def corpus():
    """The fifteen problems in label order."""
    return [ProblemSpec(*row) for row in _ROWS]


def get(problem_id):
    for p in corpus():
        if p.id == int(problem_id):
            return p
    raise KeyError(f"no corpus problem with id {problem_id!r}")
