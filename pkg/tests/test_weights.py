import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as si
from scipy.special import beta as beta_fn

from orthoseries.weights import (DomainError, InadmissibleWeight, integrate, jacobi_closed_forms,
                                 make_weight, weight_constants)


def quad_alg(alpha, beta, g=lambda x: 1.0):
    # (x+1)^beta (1-x)^alpha handled by QUADPACK's algebraic weight
    val, _ = si.quad(g, -1, 1, weight="alg", wvar=(beta, alpha), epsabs=1e-13, epsrel=1e-13)
    return val


@pytest.mark.parametrize("a,b", [(0, 0), (-0.25, -0.25), (-0.4, -0.25), (0.5, 0), (0.5, 0.5), (-0.4, 0.5)])
def test_mass_and_c1_match_quadpack(a, b):
    c = weight_constants(make_weight("jacobi", a, b))
    assert c.mass == pytest.approx(quad_alg(a, b), abs=1e-10)
    assert c.c1 == pytest.approx(quad_alg(a, b, lambda x: x) / quad_alg(a, b), abs=1e-10)
    cf = jacobi_closed_forms(a, b)
    assert c.mass == pytest.approx(cf["mass"], abs=1e-9)
    assert c.c1 == pytest.approx(cf["c1"], abs=1e-9)
    assert c.c0 == pytest.approx(c.mass ** -0.5)


@pytest.mark.parametrize("a,b", [(0, 0), (-0.25, -0.25), (0.5, 0.5), (-0.4, 0.5)])
def test_k_gamma_is_arcsine_integral(a, b):
    c = weight_constants(make_weight("jacobi", a, b))
    oracle = quad_alg(a - 0.5, b - 0.5) / (2 * math.pi)
    assert c.k_gamma == pytest.approx(oracle, rel=1e-9)
    cf = jacobi_closed_forms(a, b)
    assert c.k_gamma == pytest.approx(cf["k_gamma_consistent"], rel=1e-9)
    assert cf["k_gamma_printed"] == pytest.approx(2 * c.k_gamma, rel=1e-9)


def test_legendre_constants():
    c = weight_constants(make_weight("jacobi", 0, 0))
    assert c.k_gamma == pytest.approx(0.5, abs=1e-12)
    assert c.mass == pytest.approx(2.0, abs=1e-12)
    # integral x^2 dx = 2/3, so lambda = sqrt(3/2)
    assert c.lam == pytest.approx(math.sqrt(1.5), abs=1e-12)
    assert jacobi_closed_forms(0, 0)["lambda_inv2_printed"] == pytest.approx(2.0)


def test_beta01_uniform():
    w = make_weight("beta01", 1, 1)
    c = weight_constants(w)
    assert c.mass == pytest.approx(1.0, abs=1e-12)
    assert c.c1 == pytest.approx(0.5, abs=1e-12)
    assert c.lam == pytest.approx(2 * math.sqrt(3), abs=1e-10)
    assert c.k_gamma == pytest.approx(0.5, abs=1e-10)


def test_beta01_density_integrates_to_one():
    w = make_weight("beta01", 2.5, 1.5)
    val, _ = si.quad(lambda x: float(w(np.array([x]))[0]), 0, 1)
    assert val == pytest.approx(1.0, abs=1e-8)
    assert weight_constants(w).c1 == pytest.approx(2.5 / 4.0, abs=1e-10)


def test_endpoints_are_zero_and_outside_raises():
    w = make_weight("jacobi", -0.25, -0.25)
    assert np.all(w(np.array([-1.0, 1.0])) == 0.0)
    assert w(np.array([0.0]))[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        w(np.array([1.5]))


@pytest.mark.parametrize("a,b", [(-0.5, 0), (0, -0.7), (-1.2, 0)])
def test_inadmissible_jacobi(a, b):
    with pytest.raises(InadmissibleWeight):
        make_weight("jacobi", a, b)


def test_inadmissible_beta01_and_unknown():
    with pytest.raises(InadmissibleWeight):
        make_weight("beta01", 0, 1)
    with pytest.raises(ValueError):
        make_weight("hermite", 0, 0)


def test_tabulated_weight_matches_quadpack():
    xs = np.linspace(-1, 1, 9)
    w = make_weight("custom-tabulated", 0.0, 0.0, table=(xs, 1 + 0.5 * xs ** 2))
    c = weight_constants(w)
    assert c.mass == pytest.approx(2 + 1 / 3, abs=1e-9)
    with pytest.raises(InadmissibleWeight):
        make_weight("custom-tabulated", 0.0, 0.0, table=(xs, xs))


def test_integrate_reports_order():
    w = make_weight("jacobi", 0.3, -0.2)
    val, order = integrate(w, np.cos, quad_order=8)
    assert val == pytest.approx(quad_alg(0.3, -0.2, math.cos), abs=1e-10)
    assert order >= 16


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.45, 2.0), st.floats(-0.45, 2.0))
def test_mass_closed_form_property(a, b):
    c = weight_constants(make_weight("jacobi", a, b))
    assert c.mass == pytest.approx(2 ** (a + b + 1) * beta_fn(a + 1, b + 1), rel=1e-9)
    assert c.c1 == pytest.approx((b - a) / (a + b + 2), abs=1e-9)
