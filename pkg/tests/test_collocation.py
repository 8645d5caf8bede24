import math

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from ivpquad import kernels
from ivpquad.basis import S_FAMILY, _family_values
from ivpquad.collocation import (MAX_SIZE, build_system, gauss_legendre_nodes,
                                 solve_coefficients, unpack_lu)
from ivpquad.errors import ConfigurationError


def test_known_nodes():
    assert np.allclose(gauss_legendre_nodes(2), [-1 / math.sqrt(3), 1 / math.sqrt(3)],
                       rtol=0, atol=2.3e-16)
    n3 = gauss_legendre_nodes(3)
    assert np.allclose(n3, [-math.sqrt(0.6), 0.0, math.sqrt(0.6)], rtol=0, atol=2.3e-16)
    assert n3[1] == 0.0


@pytest.mark.parametrize("M", [4, 7, 13, 20, 33, 64])
def test_nodes_against_numpy(M):
    nodes = gauss_legendre_nodes(M)
    ref, _ = npleg.leggauss(M)
    assert np.all(np.diff(nodes) > 0)
    assert np.allclose(nodes, ref, rtol=0, atol=4e-16)
    assert np.array_equal(nodes, -nodes[::-1])
    c = np.zeros(M + 1)
    c[M] = 1.0
    assert np.max(np.abs(npleg.legval(nodes, c))) <= 1e-14 * M


def test_node_range_errors():
    with pytest.raises(ConfigurationError):
        gauss_legendre_nodes(1)
    with pytest.raises(ConfigurationError):
        gauss_legendre_nodes(MAX_SIZE + 1)


def test_system_cached_and_read_only():
    s = build_system(13)
    assert build_system(13) is s
    with pytest.raises(ValueError):
        s.A[0, 0] = 1.0


def test_lu_reconstructs_matrix():
    s = build_system(13)
    perm, L, U = unpack_lu(s)
    assert np.allclose(perm @ L @ U, s.A, rtol=0, atol=1e-14)


def test_zero_rhs():
    s = build_system(13)
    assert np.array_equal(s.solve(np.zeros(13)), np.zeros(13))


@pytest.mark.parametrize("M", [5, 13, 30])
def test_solve_matches_numpy(rng, M):
    s = build_system(M)
    for _ in range(10):
        rhs = rng.normal(size=M)
        assert np.allclose(solve_coefficients(s, rhs), np.linalg.solve(s.A, rhs),
                           rtol=1e-12, atol=1e-12)


def test_rhs_shape_checked():
    with pytest.raises(ValueError):
        solve_coefficients(build_system(13), np.zeros(12))


@pytest.mark.parametrize("backend", ["python", "active"])
def test_lu_kernels_against_numpy(rng, backend):
    mod = kernels.python_backend if backend == "python" else kernels
    for n in (3, 8, 21):
        A = rng.normal(size=(n, n))
        lu, piv, min_pivot = mod.lu_factor(A)
        assert min_pivot > 0
        rhs = rng.normal(size=n)
        assert np.allclose(mod.lu_solve(lu, piv, rhs), np.linalg.solve(A, rhs),
                           rtol=1e-10, atol=1e-10)


def test_singular_matrix_reports_tiny_pivot():
    A = np.ones((4, 4))
    _, _, min_pivot = kernels.lu_factor(A)
    assert min_pivot <= 1e-12


def test_polynomial_exactness(rng):
    # f - f(-1) of degree <= M lies in the span of s_0..s_{M-1}
    M = 13
    s = build_system(M)
    for deg in range(M + 1):
        c = rng.normal(size=deg + 1)
        fv = np.polynomial.polynomial.polyval(s.nodes, c)
        f_left = np.polynomial.polynomial.polyval(-1.0, c)
        B = s.solve(fv - f_left)
        taus = np.linspace(-1, 1, 9)
        recon = _family_values(M, taus, S_FAMILY) @ B + f_left
        want = np.polynomial.polynomial.polyval(taus, c)
        assert np.allclose(recon, want, rtol=0, atol=1e-12 * np.abs(c).sum())
