# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, fabs, INFINITY, isfinite, M_PI

cnp.import_array()

PURE_PYTHON = False

cdef double NOISE_MARGIN = 1e3
cdef double STALL_MARGIN = 1e2


cdef inline void _first_two(double tau, int d, double* f0, double* f1) nogil:
    cdef double t1
    if d == 0:
        f0[0] = 1.0
        f1[0] = tau
    elif d == 1:
        f0[0] = tau + 1.0
        f1[0] = 0.5 * (tau * tau - 1.0)
    else:
        t1 = tau + 1.0
        f0[0] = 0.5 * t1 * t1
        f1[0] = t1 * t1 * (tau - 2.0) / 6.0


cdef double _clenshaw(const double[::1] B, double tau, int d) nogil:
    cdef Py_ssize_t n = B.shape[0]
    cdef Py_ssize_t k
    cdef double f0, f1, b1 = 0.0, b2 = 0.0, bk, alpha, beta
    _first_two(tau, d, &f0, &f1)
    if n == 1:
        return B[0] * f0
    for k in range(n - 1, 0, -1):
        alpha = (2.0 * (k + 1) - 1.0) * tau / (k + 1 + d)
        beta = -(k + 1.0 - d) / (k + 2.0 + d)
        bk = B[k] + alpha * b1 + beta * b2
        b2 = b1
        b1 = bk
    return B[0] * f0 + b1 * f1 - (1.0 - d) / (2.0 + d) * b2 * f0


def clenshaw(B, double tau, int d):
    cdef const double[::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    return _clenshaw(Bv, tau, d)


def clenshaw_array(B, taus, int d):
    cdef const double[::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(taus, dtype=np.float64).ravel()
    out = np.empty(tv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(tv.shape[0]):
        ov[i] = _clenshaw(Bv, tv[i], d)
    return out.reshape(np.shape(taus))


def lu_factor(A):
    LU = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = LU
    cdef Py_ssize_t n = a.shape[0]
    piv = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t[::1] pv = piv
    cdef Py_ssize_t i, j, k, p
    cdef double best, tmp, pivot, m, min_pivot = INFINITY
    for k in range(n):
        p = k
        best = fabs(a[k, k])
        for i in range(k + 1, n):
            if fabs(a[i, k]) > best:
                best = fabs(a[i, k])
                p = i
        pv[k] = p
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
        pivot = a[k, k]
        if fabs(pivot) < min_pivot:
            min_pivot = fabs(pivot)
        if pivot == 0.0:
            continue
        for i in range(k + 1, n):
            m = a[i, k] / pivot
            a[i, k] = m
            for j in range(k + 1, n):
                a[i, j] -= m * a[k, j]
    return LU, piv, min_pivot


cdef void _lu_solve(const double[:, ::1] a, const Py_ssize_t[::1] pv,
                    double* x) nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, p
    cdef double acc, tmp
    for i in range(n):
        p = pv[i]
        if p != i:
            tmp = x[i]
            x[i] = x[p]
            x[p] = tmp
    for i in range(1, n):
        acc = x[i]
        for j in range(i):
            acc -= a[i, j] * x[j]
        x[i] = acc
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc -= a[i, j] * x[j]
        x[i] = acc / a[i, i]


def lu_solve(LU, piv, rhs):
    cdef const double[:, ::1] a = np.ascontiguousarray(LU, dtype=np.float64)
    cdef const Py_ssize_t[::1] pv = np.ascontiguousarray(piv, dtype=np.intp)
    x = np.array(rhs, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    _lu_solve(a, pv, &xv[0])
    return x


def picard_cos_element(U, S0, LU, piv, nodes, double x_left, double q,
                       double y_left, double f_left, B_seed, double tol,
                       int max_iter):
    cdef const double[:, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef const double[::1] s0 = np.ascontiguousarray(S0, dtype=np.float64)
    cdef const double[:, ::1] a = np.ascontiguousarray(LU, dtype=np.float64)
    cdef const Py_ssize_t[::1] pv = np.ascontiguousarray(piv, dtype=np.intp)
    cdef const double[::1] tn = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t n = tn.shape[0]
    B_arr = np.array(B_seed, dtype=np.float64, copy=True)
    work = np.empty(n)
    cdef double[::1] B = B_arr
    cdef double[::1] w = work
    cdef double[64] pix
    cdef double[64] base
    cdef Py_ssize_t i, j
    cdef int it = 0, growth = 0, stalled = 0
    cdef double acc, d, step = INFINITY, scale = 1.0
    cdef double last = INFINITY, prev = INFINITY, rate = 0.0
    if n > 64:
        raise ValueError("system size above 64 is not supported")
    for i in range(n):
        pix[i] = M_PI * (x_left + q * (tn[i] + 1.0))
        base[i] = s0[i] * (q * f_left) + y_left
    with nogil:
        for it in range(1, max_iter + 1):
            for i in range(n):
                acc = base[i]
                for j in range(n):
                    acc += u[i, j] * B[j]
                w[i] = q * (cos(pix[i] * acc) - f_left)
            _lu_solve(a, pv, &w[0])
            step = 0.0
            scale = 1.0
            for i in range(n):
                d = fabs(w[i] - B[i])
                if d > step or d != d:
                    step = d
                if fabs(w[i]) > scale:
                    scale = fabs(w[i])
                B[i] = w[i]
            prev = last
            last = step
            if not isfinite(step):
                break
            if it >= 2 and prev > NOISE_MARGIN * tol * scale:
                rate = step / prev
            if step <= tol * scale:
                break
            if it >= 2 and step <= STALL_MARGIN * tol * scale and step >= prev:
                stalled = 1
                break
            if step > prev:
                growth += 1
                if growth >= 3:
                    break
            else:
                growth = 0
    if it > max_iter:
        it = max_iter
    converged = stalled == 1 or (isfinite(step) and step <= tol * scale)
    return B_arr, it, converged, rate, last
