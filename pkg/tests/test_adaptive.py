import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthoseries.adaptive import (denoise, denoise_batch, estimate_sigma2, eval_estimate, oracle_curve,
                                  residual_variance, select_order, tails, tau, tau_curve)
from orthoseries.design import (NoiseModel, SampledSignal, SpectralDecayModel, make_grid, sample_signal,
                                synth_coefficients)


def test_tau_window():
    c = np.arange(1.0, 11.0)
    assert tau(c, 2) == 3 ** 2 + 4 ** 2
    with pytest.raises(ValueError):
        tau(c, 6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=40, max_size=40), st.integers(15, 60))
def test_tau_curve_matches_direct(vals, n):
    c = np.array(vals)
    top = n // 3
    if 2 * top > c.size:
        return
    curve = tau_curve(c, n)
    direct = [tau(c, N) for N in range(1, top + 1)]
    assert np.allclose(curve, direct, rtol=1e-12, atol=1e-9)
    m, t = select_order(c, n)
    assert t == pytest.approx(min(direct), rel=1e-12, abs=1e-9)


def test_ties_pick_smallest_order():
    c = np.zeros(40)
    assert select_order(c, 60) == (1, 0.0)


def test_pure_polynomial_noiseless(legendre):
    g = make_grid(300)
    f = 1 + 2 * g.points - g.points ** 2
    r = denoise(SampledSignal(g, f), legendre)
    fitted = eval_estimate(r, legendre, g.points)
    assert r.m_n >= 3
    assert np.max(np.abs(fitted - f)) < 0.05


def test_denoise_batch_matches_single(jac):
    g = make_grid(240)
    truth = synth_coefficients(SpectralDecayModel(1.0), 40)
    noise = NoiseModel(sigma=0.2, seed=1)
    sigs = [sample_signal(truth, jac, g, noise, r) for r in range(4)]
    batch = denoise_batch(np.column_stack([s.xi for s in sigs]), jac, g)
    for s, b in zip(sigs, batch):
        single = denoise(s, jac)
        assert single.m_n == b.m_n
        assert single.sigma2_n == pytest.approx(b.sigma2_n, rel=1e-12)
        assert np.allclose(single.coeffs.values, b.coeffs.values, atol=1e-13)


def test_sigma2_estimate(jac):
    g = make_grid(600)
    truth = synth_coefficients(SpectralDecayModel(1.5), 100)
    s = sample_signal(truth, jac, g, NoiseModel(sigma=0.3, seed=2))
    r = denoise(s, jac)
    assert r.sigma2_n == pytest.approx(0.09, rel=0.15)
    assert estimate_sigma2(s, r, jac) == pytest.approx(r.sigma2_n)


def test_residual_variance_dof():
    assert residual_variance(np.array([1.0, -1.0, 1.0, -1.0]), np.zeros(4), 1) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        residual_variance(np.zeros(3), np.zeros(3), 2)


def test_basis_too_small_rejected(legendre):
    g = make_grid(1500)
    with pytest.raises(ValueError):
        denoise(SampledSignal(g, np.zeros(1500)), legendre)


def test_oracle_curve():
    truth = synth_coefficients(SpectralDecayModel(1.0), 2000)
    rho = tails(truth)
    assert rho[0] == pytest.approx(np.sum(truth ** 2))
    assert rho[-1] == 0.0
    rep = oracle_curve(truth, 3000)
    N = np.arange(1, 1001)
    brute = rho[N] + N / 3000
    assert rep.a_star == pytest.approx(brute.min())
    assert rep.n0 == int(np.argmin(brute)) + 1
    # N0 ~ n^(1/(2 Delta + 1)) = n^(1/3)
    assert 5 <= rep.n0 <= 30


def test_order_grows_with_n(jac):
    truth = synth_coefficients(SpectralDecayModel(1.0), 200)
    orders = []
    for n in (300, 600):
        g = make_grid(n)
        xi = np.column_stack([sample_signal(truth, jac, g, NoiseModel(sigma=0.2, seed=5), r).xi for r in range(10)])
        orders.append(np.median([r.m_n for r in denoise_batch(xi, jac, g)]))
    assert orders[1] > orders[0]
