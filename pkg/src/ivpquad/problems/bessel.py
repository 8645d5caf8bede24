"""Spherical modified Bessel functions of integer order.

Normalisation: ``ihat_n(z) = sqrt(pi / 2z) I_{n+1/2}(z)`` and
``khat_n(z) = sqrt(2 / (pi z)) K_{n+1/2}(z)``, so ``ihat_0 = sinh(z)/z`` and
``khat_0 = exp(-z)/z``. Negative orders follow from
``ihat_{-n-1} = ihat_n + (-1)^n khat_n`` and ``khat_{-n-1} = khat_n``.

The ``*_scaled`` variants return ``exp(-z) ihat`` and ``exp(z) khat``; they
stay finite where the plain functions overflow.
"""
import math

import numpy as np

from ..errors import DomainError

MAX_ORDER = 30


def _check(n, z):
    if int(n) != n:
        raise DomainError(f"order {n!r} is not an integer")
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise DomainError(f"|order| {abs(n)} exceeds {MAX_ORDER}")
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)) or np.any(~np.isfinite(z)):
        raise DomainError("argument must be positive and finite")
    return n, z


def _khat_scaled(n, z):
    # upward recurrence khat_{k+1} = khat_{k-1} + (2k+1)/z khat_k is stable
    k0 = 1.0 / z
    if n == 0:
        return k0
    k1 = k0 * (1.0 + 1.0 / z)
    for k in range(1, n):
        k0, k1 = k1, k0 + (2 * k + 1) / z * k1
    return k1


def _ihat_scaled(n, z):
    # ihat_0 e^-z = (1 - e^-2z) / 2z; for small z use the series of sinh
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    i0 = np.where(small, (1.0 + z * z / 6.0) * np.exp(-z),
                  -np.expm1(-2.0 * zs) / (2.0 * zs))
    if n == 0:
        return i0
    # ratios rho_k = ihat_k / ihat_{k-1} from the continued fraction
    # rho_k = 1 / ((2k+1)/z + rho_{k+1}), started far above n
    top = n + 40 + int(math.ceil(float(np.max(z))))
    rho = np.zeros_like(z)
    out = i0
    ratios = []
    for k in range(top, 0, -1):
        rho = 1.0 / ((2 * k + 1) / z + rho)
        if k <= n:
            ratios.append(rho)
    for rho in reversed(ratios):
        out = out * rho
    return out


def khat_scaled(n, z):
    """``exp(z) * khat_n(z)``."""
    n, z = _check(n, z)
    if n < 0:
        n = -n - 1
    return _khat_scaled(n, z)


def ihat_scaled(n, z):
    """``exp(-z) * ihat_n(z)``."""
    n, z = _check(n, z)
    if n >= 0:
        return _ihat_scaled(n, z)
    m = -n - 1
    sign = 1.0 if m % 2 == 0 else -1.0
    return _ihat_scaled(m, z) + sign * np.exp(-2.0 * z) * _khat_scaled(m, z)


def khat(n, z):
    """Spherical modified Bessel function of the second kind."""
    n, z = _check(n, z)
    with np.errstate(over="ignore", under="ignore"):
        return khat_scaled(n, z) * np.exp(-z)


def ihat(n, z):
    """Spherical modified Bessel function of the first kind."""
    n, z = _check(n, z)
    with np.errstate(over="ignore", under="ignore"):
        return ihat_scaled(n, z) * np.exp(z)
