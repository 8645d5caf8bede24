"""Pure-Python implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
The compiled module is preferred at import time (see ``ivpquad.kernels``);
this module is the fallback and the reference for cross-checking.

Polynomial families are selected by an integer shift ``d``:

* ``d = 0`` Legendre polynomials P
* ``d = 1`` first primitives s
* ``d = 2`` second primitives u

All three obey ``(k + d) F_k = (2k - 1) tau F_{k-1} - (k - 1 - d) F_{k-2}``
for ``k >= 2``.
"""
import math

import numpy as np

PURE_PYTHON = True

# update norms below this multiple of the stopping threshold are treated as
# rounding noise when estimating the contraction rate
NOISE_MARGIN = 1e3
# an update this close to the threshold that fails to shrink is noise
STALL_MARGIN = 1e2


def _first_two(tau, d):
    if d == 0:
        return 1.0, tau
    if d == 1:
        return tau + 1.0, 0.5 * (tau * tau - 1.0)
    t1 = tau + 1.0
    return 0.5 * t1 * t1, t1 * t1 * (tau - 2.0) / 6.0


def clenshaw(B, tau, d):
    """Return ``sum_k B[k] F_k(tau)`` for family ``d`` by backward recurrence."""
    n = len(B)
    f0, f1 = _first_two(tau, d)
    if n == 1:
        return B[0] * f0
    b1 = 0.0
    b2 = 0.0
    # b_k = B_k + alpha_{k+1} b_{k+1} + beta_{k+2} b_{k+2}
    for k in range(n - 1, 0, -1):
        kp1 = k + 1
        kp2 = k + 2
        alpha = (2 * kp1 - 1) * tau / (kp1 + d)
        beta = -(kp2 - 1 - d) / (kp2 + d)
        bk = B[k] + alpha * b1 + beta * b2
        b2 = b1
        b1 = bk
    # b1 now holds b_1, b2 holds b_2
    beta2 = -(1 - d) / (2 + d)
    return B[0] * f0 + b1 * f1 + beta2 * b2 * f0


def clenshaw_array(B, taus, d):
    """Vectorised :func:`clenshaw` over an array of local coordinates."""
    taus = np.asarray(taus, dtype=float)
    n = len(B)
    f0, f1 = _first_two(taus, d)
    if n == 1:
        return B[0] * f0 + 0.0 * taus
    b1 = np.zeros_like(taus)
    b2 = np.zeros_like(taus)
    for k in range(n - 1, 0, -1):
        kp1 = k + 1
        kp2 = k + 2
        alpha = (2 * kp1 - 1) / (kp1 + d)
        beta = -(kp2 - 1 - d) / (kp2 + d)
        bk = B[k] + alpha * taus * b1 + beta * b2
        b2 = b1
        b1 = bk
    beta2 = -(1 - d) / (2 + d)
    return B[0] * f0 + b1 * f1 + beta2 * b2 * f0


def lu_factor(A):
    """Doolittle LU with partial pivoting.

    Returns ``(LU, piv, min_pivot)`` where ``LU`` packs the unit-lower and
    upper factors and ``piv[k]`` is the row swapped with row ``k`` at step k.
    """
    LU = np.array(A, dtype=float, copy=True)
    n = LU.shape[0]
    piv = np.zeros(n, dtype=np.intp)
    min_pivot = math.inf
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        piv[k] = p
        if p != k:
            LU[[k, p]] = LU[[p, k]]
        pivot = LU[k, k]
        min_pivot = min(min_pivot, abs(pivot))
        if pivot == 0.0:
            continue
        LU[k + 1:, k] /= pivot
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, piv, min_pivot


def lu_solve(LU, piv, rhs):
    """Solve ``A x = rhs`` from the packed factorisation of :func:`lu_factor`."""
    n = LU.shape[0]
    x = [float(v) for v in rhs]
    for k in range(n):
        p = piv[k]
        if p != k:
            x[k], x[p] = x[p], x[k]
    for i in range(1, n):
        row = LU[i]
        acc = x[i]
        for j in range(i):
            acc -= row[j] * x[j]
        x[i] = acc
    for i in range(n - 1, -1, -1):
        row = LU[i]
        acc = x[i]
        for j in range(i + 1, n):
            acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return np.array(x)


def picard_cos_element(U, S0, LU, piv, nodes, x_left, q, y_left, f_left,
                       B_seed, tol, max_iter):
    """Fixed-point solve of one element for ``y' = cos(pi x y)``.

    Iterates ``B <- A^{-1} q (f(x_nu, y_nu(B)) - f_left)`` where the node values
    ``y_nu`` are reconstructed from the previous ``B`` via the u-matrix ``U``.

    The loop also stops, converged, once an update within ``STALL_MARGIN``
    of the threshold is no smaller than the one before it.

    Returns ``(B, iterations, converged, rate, last_step)``. ``rate`` is the
    most recent ratio of successive update norms whose older update was still
    well above the stopping threshold, so rounding noise in the final updates
    does not leak into it; 0 if there was no such pair.
    """
    xs = x_left + q * (nodes + 1.0)
    pix = math.pi * xs
    base = S0 * (q * f_left) + y_left
    B = np.array(B_seed, dtype=float, copy=True)
    last = math.inf
    rate = 0.0
    growth = 0
    for it in range(1, max_iter + 1):
        ys = U @ B + base
        rhs = q * (np.cos(pix * ys) - f_left)
        Bn = lu_solve(LU, piv, rhs)
        step = float(np.max(np.abs(Bn - B)))
        scale = max(1.0, float(np.max(np.abs(Bn))))
        B = Bn
        prev, last = last, step
        if not math.isfinite(step):
            return B, it, False, rate, last
        if it >= 2 and prev > NOISE_MARGIN * tol * scale:
            rate = step / prev
        if step <= tol * scale:
            return B, it, True, rate, last
        if it >= 2 and step <= STALL_MARGIN * tol * scale and step >= prev:
            # no longer contracting this close to the threshold: the updates
            # are rounding noise of the fixed point itself
            return B, it, True, rate, last
        if step > prev:
            growth += 1
            if growth >= 3:
                return B, it, False, rate, last
        else:
            growth = 0
    return B, max_iter, False, rate, last
