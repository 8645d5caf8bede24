"""Legendre polynomials and their sequential primitives.

``s_mu(tau)`` is the integral of ``P_mu`` from -1 to ``tau`` and ``u_mu(tau)``
the integral of ``s_mu`` from -1 to ``tau``. Both families obey three-term
recurrences with the same shape as Bonnet's formula, so the forward
evaluation and the backward (Clenshaw) summation share one code path keyed
by a family shift: 0 for P, 1 for s, 2 for u.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import kernels
from ._kernels_py import clenshaw_array as _clenshaw_array_py

LEGENDRE = 0
S_FAMILY = 1
U_FAMILY = 2

# Summation strategy for series in the u family. "clenshaw" uses the backward
# recurrence; "naive" builds every u_mu and dots with B. The latter exists for
# cross-checking only.
SUMMATION = "clenshaw"


def _check_tau(tau):
    t = np.asarray(tau, dtype=float)
    if np.any(t < -1.0) or np.any(t > 1.0) or np.any(np.isnan(t)):
        raise ValueError(f"local coordinate must lie in [-1, 1], got {tau!r}")


def _family_values(n, tau, d):
    """Rows ``F_0..F_{n-1}`` of family ``d`` at ``tau`` (last axis = order)."""
    tau = np.asarray(tau, dtype=float)
    out = np.empty(tau.shape + (n,))
    if d == LEGENDRE:
        f0, f1 = np.ones_like(tau), tau
    elif d == S_FAMILY:
        f0, f1 = tau + 1.0, 0.5 * (tau * tau - 1.0)
    else:
        t1 = tau + 1.0
        f0, f1 = 0.5 * t1 * t1, t1 * t1 * (tau - 2.0) / 6.0
    out[..., 0] = f0
    if n > 1:
        out[..., 1] = f1
    for k in range(2, n):
        out[..., k] = ((2 * k - 1) * tau * out[..., k - 1]
                       - (k - 1 - d) * out[..., k - 2]) / (k + d)
    return out


def legendre_values(n, tau):
    """``P_0..P_{n-1}`` at ``tau``."""
    return _family_values(n, tau, LEGENDRE)


def eval_legendre(mu, tau):
    return _family_values(mu + 1, tau, LEGENDRE)[..., mu]


def eval_s(mu, tau):
    """First primitive ``s_mu(tau)`` of the Legendre polynomial ``P_mu``."""
    if mu < 0:
        raise ValueError("order must be non-negative")
    _check_tau(tau)
    return _family_values(mu + 1, tau, S_FAMILY)[..., mu]


def eval_u(mu, tau):
    """Second primitive ``u_mu(tau)``; vanishes with its slope at -1."""
    if mu < 0:
        raise ValueError("order must be non-negative")
    _check_tau(tau)
    return _family_values(mu + 1, tau, U_FAMILY)[..., mu]


def eval_basis_row(M, tau):
    """Row ``[s_0(tau), ..., s_{M-1}(tau)]`` of the collocation matrix."""
    if M < 2:
        raise ValueError("system size must be at least 2")
    _check_tau(tau)
    return _family_values(M, tau, S_FAMILY)


def u_values(M, tau):
    return _family_values(M, tau, U_FAMILY)


def clenshaw_sum(B, tau, family):
    """``sum_mu B_mu F_mu(tau)`` for a scalar ``tau`` in any family."""
    return kernels.clenshaw(np.asarray(B, dtype=float), float(tau), family)


def clenshaw_sum_u(B, tau):
    """``sum_mu u_mu(tau) B_mu`` via the backward recurrence.

    With ``SUMMATION = "naive"`` the basis is built explicitly instead.
    """
    B = np.asarray(B, dtype=float)
    if SUMMATION == "naive":
        return float(u_values(len(B), tau) @ B)
    return kernels.clenshaw(B, float(tau), U_FAMILY)


def clenshaw_sum_array(B, taus, family):
    B = np.asarray(B, dtype=float)
    if SUMMATION == "naive":
        return _family_values(len(B), taus, family) @ B
    return kernels.clenshaw_array(B, taus, family)


def clenshaw_sum_array_py(B, taus, family):
    return _clenshaw_array_py(np.asarray(B, dtype=float), taus, family)


def legendre_end_derivative(mu, k):
    """``k``-th derivative of ``P_mu`` at ``tau = 1``.

    Closed form ``(mu + k)! / ((mu - k)! 2^k k!)``; zero for ``k > mu``.
    """
    if k > mu:
        return 0.0
    return factorial(mu + k) / (factorial(mu - k) * 2 ** k * factorial(k))


_END_WEIGHTS = {}


def end_derivative_weights(M, k):
    key = (M, k)
    w = _END_WEIGHTS.get(key)
    if w is None:
        w = np.array([legendre_end_derivative(mu, k) for mu in range(M)])
        w.setflags(write=False)
        _END_WEIGHTS[key] = w
    return w


def derivative_values_at_end(B):
    """tau-derivatives 1..4 of ``sum_mu u_mu(tau) B_mu`` at ``tau = +1``.

    ``d1 = 2 B_0`` since only ``s_0`` survives at +1; ``d2 = sum B``;
    ``d3``, ``d4`` weight ``B`` by ``P'_mu(1)`` and ``P''_mu(1)``.
    """
    B = np.asarray(B, dtype=float)
    M = len(B)
    if M < 4:
        raise ValueError("need at least 4 coefficients")
    d1 = 2.0 * B[0]
    d2 = float(B.sum())
    d3 = float(end_derivative_weights(M, 1) @ B)
    d4 = float(end_derivative_weights(M, 2) @ B)
    return d1, d2, d3, d4


def s_derivative_values_at_end(B):
    """tau-derivatives 1..4 of ``sum_mu s_mu(tau) B_mu`` at ``tau = +1``."""
    B = np.asarray(B, dtype=float)
    M = len(B)
    return (float(B.sum()),
            float(end_derivative_weights(M, 1) @ B),
            float(end_derivative_weights(M, 2) @ B),
            float(end_derivative_weights(M, 3) @ B))


@dataclass(frozen=True)
class BasisTable:
    """Evaluator for P, s and u up to order ``max_order - 1``."""

    max_order: int

    def __post_init__(self):
        if self.max_order < 2:
            raise ValueError("max_order must be >= 2")

    def legendre(self, tau):
        return _family_values(self.max_order, tau, LEGENDRE)

    def s(self, tau):
        return _family_values(self.max_order, tau, S_FAMILY)

    def u(self, tau):
        return _family_values(self.max_order, tau, U_FAMILY)
