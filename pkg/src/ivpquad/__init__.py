"""Integration as an initial value problem.

Definite integrals ``y(b) = int_a^b f`` are obtained by propagating
``dy/dx = f`` over adaptive finite elements, each a Legendre expansion
collocated at Gauss-Legendre nodes. The result is a dense, serializable
solution object.
"""
__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, IntegrandError, IvpQuadError,
                     NonConvergence, SolutionFormatError, StiffnessError)
from .kernels import BACKEND
from .propagator import Element, RunStats, ToleranceConfig, propagate
from .solution import SolutionFunction, load, save
from .problems.bender import solve_bender
from .problems.bessel import ihat, ihat_scaled, khat, khat_scaled
from .problems.double_range import DoubleRangeSpec, double_range_integral

__all__ = [
    "BACKEND", "ConfigurationError", "DomainError", "DoubleRangeSpec", "Element",
    "IntegrandError", "IvpQuadError", "NonConvergence", "RunStats",
    "SolutionFormatError", "SolutionFunction", "StiffnessError", "ToleranceConfig",
    "double_range_integral", "ihat", "ihat_scaled", "khat", "khat_scaled", "load",
    "propagate", "save", "solve_bender",
]
