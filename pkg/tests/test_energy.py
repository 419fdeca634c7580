import numpy as np
import pytest

from orthoseries.adaptive import denoise_batch
from orthoseries.design import NoiseModel, SpectralDecayModel, make_grid, sample_signal, synth_coefficients
from orthoseries.energy import (EnergyWeight, fisher_interval, ordinary_energy, select_order_w, tau_w,
                                weighted_energy, weighted_energy_truth)


@pytest.fixture(scope="module")
def batch(legendre):
    truth = synth_coefficients(SpectralDecayModel(1.5), 400)
    g = make_grid(600)
    sigs = [sample_signal(truth, legendre, g, NoiseModel(sigma=0.2, seed=21), r) for r in range(300)]
    return truth, sigs, denoise_batch(np.column_stack([s.xi for s in sigs]), legendre, g)


def test_theta_zero_reduces_to_ordinary(batch, legendre):
    _, sigs, res = batch
    for s, r in zip(sigs[:10], res[:10]):
        o = ordinary_energy(r, legendre, "corrected")
        w = weighted_energy(s, legendre, EnergyWeight(0.0), result=r)
        assert w.value == o.value
        assert w.order_used == o.order_used == r.m_n


def test_literal_correction_differs(batch, legendre):
    _, _, res = batch
    r = res[0]
    assert ordinary_energy(r, legendre, "paper").value != ordinary_energy(r, legendre, "corrected").value
    with pytest.raises(ValueError):
        ordinary_energy(r, legendre, "other")


def test_energy_unbiased_and_variance(batch, legendre):
    truth, _, res = batch
    g_true = float(np.dot(truth, truth))
    vals = np.array([ordinary_energy(r, legendre).value for r in res])
    sd_pred = np.sqrt(np.median([ordinary_energy(r, legendre).variance for r in res]))
    # finite-n Riemann bias of the coefficients is about 1% here
    assert abs(vals.mean() - g_true) < 0.015 * g_true
    assert vals.std() == pytest.approx(sd_pred, rel=0.2)


def test_weighted_energy_tracks_truth(batch, legendre):
    truth, sigs, res = batch
    w = EnergyWeight(1.0)
    target = weighted_energy_truth(truth, w)
    vals = np.array([weighted_energy(None, legendre, w, result=r).value for r in res])
    assert np.median(np.abs(vals - target)) < 0.05 * target


def test_fisher_interval():
    fi = fisher_interval(4.0, 100, 0.25, 1.0)
    assert fi.root == 2.0 and fi.radius == pytest.approx(0.3)
    assert (fi.lo, fi.hi) == pytest.approx((1.7 ** 2, 2.3 ** 2))
    neg = fisher_interval(-0.1, 100, 0.25, 1.0)
    assert neg.clipped and neg.root_lo == 0.0


def test_energy_weight_forms():
    assert np.allclose(EnergyWeight(2.0).values(3), [1, 4, 9])
    assert np.allclose(EnergyWeight(form="tabulated", table=(1.0, 2.0, 3.0)).values(2), [1, 2])
    with pytest.raises(ValueError):
        EnergyWeight(-1.0)
    with pytest.raises(ValueError):
        EnergyWeight(form="tabulated", table=(1.0, 0.0))
    with pytest.raises(ValueError):
        EnergyWeight(form="tabulated", table=(1.0,)).values(3)


def test_tau_w_and_order():
    c = np.array([1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0, 0.0, 0.0])
    w = EnergyWeight(1.0)
    assert tau_w(c, w, 2) == pytest.approx(3 * 0.04 + 4 * 0.01)
    assert select_order_w(c, w, 15) >= 1


def test_ci_contains_value(batch, legendre):
    _, sigs, res = batch
    e = weighted_energy(sigs[0], legendre, EnergyWeight(1.0), result=res[0])
    assert e.ci95[0] <= e.value <= e.ci95[1]
    o = ordinary_energy(res[0], legendre)
    assert o.ci95[0] <= o.value <= o.ci95[1]
