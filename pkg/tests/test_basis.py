import time

import numpy as np
import pytest
from scipy.special import eval_jacobi, gammaln

from orthoseries.basis import (BasisConstructionError, build_basis, gram_matrix, lipschitz_constants,
                               sup_norms)
from orthoseries.weights import DomainError, make_weight

from conftest import jacobi_recurrence


@pytest.mark.parametrize("a,b", [(0, 0), (-0.25, -0.25), (-0.4, 0.5), (0.5, 0.5)])
def test_recurrence_matches_analytic_jacobi(a, b):
    basis = build_basis(make_weight("jacobi", a, b), 300)
    diag, off = jacobi_recurrence(a, b, 300)
    assert np.max(np.abs(basis.a - diag)) < 1e-11
    assert np.max(np.abs(basis.b[1:] - off)) < 1e-11
    assert basis.b[0] == 0.0


def _normalized_jacobi(n, a, b, x):
    # classical P_n^(a,b) is orthogonal for (1-x)^a (1+x)^b
    logh = ((a + b + 1) * np.log(2) - np.log(2 * n + a + b + 1) + gammaln(n + a + 1) + gammaln(n + b + 1)
            - gammaln(n + a + b + 1) - gammaln(n + 1))
    return eval_jacobi(n, a, b, x) / np.exp(0.5 * logh)


@pytest.mark.parametrize("a,b", [(-0.25, 0.0), (0.5, -0.4)])
def test_low_degree_values_match_scipy(a, b):
    basis = build_basis(make_weight("jacobi", a, b), 40)
    x = np.linspace(-0.99, 0.99, 37)
    v = basis(x, 21)
    for n in range(21):
        ref = _normalized_jacobi(n, a, b, x)
        # leading-coefficient sign of classical Jacobi is positive, as is ours
        assert np.max(np.abs(v[:, n] - ref)) < 1e-10 * max(1, np.max(np.abs(ref)))


@pytest.mark.parametrize("kind,a,b", [("jacobi", -0.4, -0.4), ("jacobi", -0.25, 0), ("jacobi", 0, 0.5),
                                      ("jacobi", 0.5, 0.5), ("beta01", 1, 1), ("beta01", 2, 3)])
def test_gram_identity(kind, a, b):
    t = time.perf_counter()
    basis = build_basis(make_weight(kind, a, b), 31)
    g = gram_matrix(basis, 31, 211)
    assert np.max(np.abs(g - np.eye(31))) < 1e-8
    assert basis.ortho_error < 1e-8
    assert time.perf_counter() - t < 10


def test_tabulated_basis_orthonormal():
    xs = np.linspace(-1, 1, 11)
    w = make_weight("custom-tabulated", -0.25, 0.0, table=(xs, 1.5 + np.sin(xs)))
    basis = build_basis(w, 31)
    assert basis.ortho_error < 1e-8


def test_high_degree_is_stable(legendre):
    x = np.linspace(-1, 1, 2001)
    v = legendre(x, 400)
    assert np.all(np.isfinite(v))
    # orthonormal Legendre: |phi_k| <= sqrt((2k-1)/2), attained at the ends
    k = np.arange(1, 401)
    assert np.allclose(np.abs(v[-1]), np.sqrt((2 * k - 1) / 2), rtol=1e-8)


def test_triples_reproduce_recurrence(jac):
    x = np.linspace(-0.9, 0.9, 11)
    v = jac(x, 12)
    tr = jac.triples
    for j in range(1, 11):
        A, B, C = tr[j]
        assert np.allclose(v[:, j + 1], (A * x + B) * v[:, j] + C * v[:, j - 1], atol=1e-12)


def test_errors(legendre):
    with pytest.raises(ValueError):
        legendre(np.array([0.0]), 401)
    with pytest.raises(DomainError):
        legendre(np.array([1.1]), 3)
    with pytest.raises(ValueError):
        build_basis(make_weight("jacobi", 0, 0), 1)
    assert issubclass(BasisConstructionError, RuntimeError)


def test_sup_norm_and_lipschitz(legendre):
    grid = np.linspace(-1, 1, 4001)
    s = sup_norms(legendre, grid, 50)
    assert s[0] == pytest.approx(np.sqrt(0.5))
    lip = lipschitz_constants(legendre, grid, 50)
    assert np.all(np.isfinite(lip)) and np.all(lip >= 0)
