"""Gauss-Legendre collocation system shared by every element.

The matrix ``A[nu, mu] = s_mu(tau_nu)`` depends only on the system size, so it
is assembled and factorised once per size and cached for the lifetime of the
process. A second matrix of plain Legendre values serves the first element
of integrands that must not be evaluated at the lower limit.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .basis import LEGENDRE, S_FAMILY, U_FAMILY, _family_values
from .errors import ConfigurationError

MAX_SIZE = 64
PIVOT_FLOOR = 1e-12


def _legendre_and_slope(n, x):
    p0, p1 = 1.0, x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # P_n = p1, P_{n-1} = p0
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


def gauss_legendre_nodes(M):
    """Roots of ``P_M`` in ascending order.

    Newton's method from the asymptotic guesses
    ``cos(pi (k - 1/4) / (M + 1/2))``; the negative half is mirrored so the
    set is exactly symmetric.
    """
    if not 2 <= M <= MAX_SIZE:
        raise ConfigurationError(f"system size M={M} outside [2, {MAX_SIZE}]")
    half = (M + 1) // 2
    roots = np.empty(half)
    for k in range(1, half + 1):
        x = math.cos(math.pi * (k - 0.25) / (M + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_slope(M, x)
            dx = p / dp
            x -= dx
            if abs(dx) <= 1e-15:
                break
        else:
            raise RuntimeError(f"Newton iteration for P_{M} roots did not converge")
        roots[k - 1] = x
    if M % 2:
        roots[-1] = 0.0
    pos = roots[::-1]
    if M % 2:
        nodes = np.concatenate([-roots[:-1], pos])
    else:
        nodes = np.concatenate([-roots, pos])
    return nodes


@dataclass(frozen=True, eq=False)
class CollocationSystem:
    """Immutable per-size collocation data.

    ``A`` holds ``s_mu(tau_nu)``; ``lu``/``piv`` its pivoted factorisation.
    ``P``/``p_lu``/``p_piv`` are the Legendre analogue for singular starts.
    ``U`` and ``S0`` reconstruct ``y`` at the nodes for nonlinear problems.
    """

    M: int
    nodes: np.ndarray
    A: np.ndarray
    lu: np.ndarray
    piv: np.ndarray
    P: np.ndarray
    p_lu: np.ndarray
    p_piv: np.ndarray
    U: np.ndarray
    S0: np.ndarray

    def solve(self, rhs):
        return solve_coefficients(self, rhs)

    def solve_legendre(self, rhs):
        return kernels.lu_solve(self.p_lu, self.p_piv, np.asarray(rhs, dtype=float))


def _factor(matrix, M, label):
    lu, piv, min_pivot = kernels.lu_factor(matrix)
    if not min_pivot > PIVOT_FLOOR:
        raise ConfigurationError(
            f"{label} collocation matrix for M={M} is numerically singular "
            f"(smallest pivot {min_pivot:.3e})")
    return lu, piv


@lru_cache(maxsize=None)
def build_system(M):
    """Assemble and factorise the collocation matrices for size ``M``."""
    nodes = gauss_legendre_nodes(M)
    A = _family_values(M, nodes, S_FAMILY)
    P = _family_values(M, nodes, LEGENDRE)
    U = _family_values(M, nodes, U_FAMILY)
    S0 = nodes + 1.0
    lu, piv = _factor(A, M, "s-basis")
    p_lu, p_piv = _factor(P, M, "Legendre")
    arrays = (nodes, A, lu, piv, P, p_lu, p_piv, U, S0)
    for arr in arrays:
        arr.setflags(write=False)
    return CollocationSystem(M, *arrays)


def solve_coefficients(system, rhs):
    """Back-substitute ``A B = rhs`` against the stored factorisation."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (system.M,):
        raise ValueError(f"rhs must have length {system.M}")
    return kernels.lu_solve(system.lu, system.piv, rhs)


def unpack_lu(system):
    """Return explicit ``(perm, L, U)`` with ``A = perm @ L @ U``."""
    n = system.M
    L = np.tril(system.lu, -1) + np.eye(n)
    Up = np.triu(system.lu)
    perm = np.eye(n)
    for k in range(n):
        p = system.piv[k]
        if p != k:
            perm[[k, p]] = perm[[p, k]]
    return perm.T, L, Up
