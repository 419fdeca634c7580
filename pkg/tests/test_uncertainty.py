import dataclasses

import numpy as np
import pytest

from orthoseries.adaptive import denoise, denoise_batch
from orthoseries.basis import gamma_quadrature
from orthoseries.design import (NoiseModel, SampledSignal, SpectralDecayModel, make_grid, replication_rng,
                                sample_signal, signal_values, synth_coefficients)
from orthoseries.uncertainty import QUANTILE_FACTOR, confidence_report, estimate_tail, true_error


@pytest.fixture(scope="module")
def fits(jac):
    truth = synth_coefficients(SpectralDecayModel(1.0), 400)
    g = make_grid(600)
    xi = np.column_stack([sample_signal(truth, jac, g, NoiseModel(sigma=0.2, seed=8), r).xi for r in range(60)])
    return truth, denoise_batch(xi, jac, g)


def test_bound_dominates_tau(fits):
    for r in fits[1]:
        c = confidence_report(r)
        assert c.bound95 >= c.tau_star >= 0
        assert c.delta_n >= 0 and c.rho_hat >= 0
        assert c.quantile_factor == QUANTILE_FACTOR


def test_noiseless_degenerates(legendre):
    g = make_grid(300)
    f = 0.5 + g.points - g.points ** 2
    r = denoise(SampledSignal(g, f), legendre)
    assert r.sigma2_n < 1e-3
    c = confidence_report(dataclasses.replace(r, sigma2_n=0.0))
    assert c.delta_n == 0.0
    assert c.bound95 == c.tau_star


def test_pure_noise_tail_near_zero(jac):
    g = make_grid(600)
    xi = np.column_stack([NoiseModel().unit(replication_rng(4, r), 600) * 0.3 for r in range(200)])
    rho = [estimate_tail(r) for r in denoise_batch(xi, jac, g)]
    assert np.median(rho) < 0.3 ** 2 * 10 / 600


def test_rho_hat_within_factor_three(fits):
    truth, res = fits
    from orthoseries.adaptive import tails
    rho = tails(truth)
    ok = [1 / 3 <= estimate_tail(r) / rho[r.m_n] <= 3 for r in res if rho[r.m_n] > 0]
    assert np.mean(ok) >= 0.5


def test_true_error_parseval(jac):
    truth = synth_coefficients(SpectralDecayModel(1.5), 30)
    g = make_grid(500)
    s = sample_signal(truth, jac, g, NoiseModel(sigma=0.1, seed=3))
    r = denoise(s, jac)
    est = r.coeffs.values
    diff = lambda x: (signal_values(est, jac, x) - signal_values(truth, jac, x)) ** 2
    quad = gamma_quadrature(jac, diff, 256)
    assert true_error(r, truth) == pytest.approx(quad, abs=1e-6)
    with pytest.raises(ValueError):
        true_error(r, None)


def test_exact_fit_zero_error(legendre):
    g = make_grid(300)
    r = denoise(SampledSignal(g, np.zeros(300)), legendre)
    assert true_error(r, np.zeros(5)) == 0.0
    truth = np.array([1.0, 0.5])
    assert true_error(r, truth) == pytest.approx(1.25)
