"""Energy functionals ``sum_k w(k) c(k)^2`` and their estimates.

Two correction modes are provided.  ``paper`` reproduces the printed
estimators literally: ordinary energy adds ``tau*`` after subtracting
``M K^2 sigma^2 / n``, and the weighted form subtracts a single
``K^2 sigma^2 / n``.  ``corrected`` (default) subtracts the summed noise
contribution of every retained coefficient and adds back only the
noise-free part of the window statistic, clipped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adaptive import DenoiseResult, denoise, select_order, tau_curve
from .basis import OrthonormalBasis
from .coefficients import CoefficientSet
from .design import SampledSignal

CORRECTION_MODES = ("corrected", "paper")
Z95 = 1.959963984540054
FISHER_FACTOR = 6.0


@dataclass(frozen=True)
class EnergyWeight:
    theta: float = 0.0
    form: str = "power"
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.form == "power":
            if self.theta < 0:
                raise ValueError("energy order theta must be non-negative")
        elif self.form == "tabulated":
            if not self.table or min(self.table) <= 0:
                raise ValueError("tabulated energy weights must be positive")
        else:
            raise ValueError("form must be 'power' or 'tabulated'")

    def values(self, k_max: int) -> np.ndarray:
        if self.form == "tabulated":
            if len(self.table) < k_max:
                raise ValueError(f"energy weight table has {len(self.table)} entries, need {k_max}")
            return np.asarray(self.table[:k_max], dtype=float)
        k = np.arange(1, k_max + 1, dtype=float)
        return k ** self.theta


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    variance: float
    ci95: tuple[float, float]
    order_used: int
    kind: str
    correction_mode: str
    truncated: float
    k_const: float
    negative: bool = False
    theta: float = 0.0


@dataclass(frozen=True)
class FisherInterval:
    """Interval for ``sqrt(G)`` and its square on the energy scale."""

    root: float
    radius: float
    root_lo: float
    root_hi: float
    lo: float
    hi: float
    clipped: bool


def fisher_interval(value: float, n: int, sigma2_n: float, k_const: float) -> FisherInterval:
    """``|sqrt(G) - sqrt(G(n))| <= 6 sigma(n) K / sqrt(n)``."""
    clipped = value < 0
    root = math.sqrt(max(value, 0.0))
    radius = FISHER_FACTOR * math.sqrt(max(sigma2_n, 0.0)) * k_const / math.sqrt(n)
    lo = max(0.0, root - radius)
    hi = root + radius
    return FisherInterval(root, radius, lo, hi, lo * lo, hi * hi, clipped)


def weighted_energy_truth(truth: np.ndarray, w: EnergyWeight) -> float:
    truth = np.asarray(truth, dtype=float)
    return float(np.dot(w.values(truth.size), truth * truth))


def tau_w(c: CoefficientSet | np.ndarray, w: EnergyWeight, N: int) -> float:
    values = c.values if isinstance(c, CoefficientSet) else np.asarray(c)
    if N < 1 or 2 * N > values.shape[0]:
        raise ValueError(f"window ({N}, {2 * N}] exceeds {values.shape[0]} coefficients")
    win = values[N:2 * N]
    return float(np.dot(w.values(2 * N)[N:], win * win))


def select_order_w(c: CoefficientSet | np.ndarray, w: EnergyWeight, n: int) -> int:
    values = c.values if isinstance(c, CoefficientSet) else np.asarray(c)
    return select_order(values, n, w.values(values.shape[0]))[0]


def _estimate(r: DenoiseResult, wk: np.ndarray, order: int, window: float,
              correction_mode: str, weighted: bool) -> tuple[float, float]:
    """Energy value and the debiased truncated energy."""
    if correction_mode not in CORRECTION_MODES:
        raise ValueError(f"correction mode must be one of {CORRECTION_MODES}")
    c = r.all_coeffs.values
    s2, n, prof = r.sigma2_n, r.n, r.profile
    head = float(np.dot(wk[:order], c[:order] * c[:order]))
    bias = s2 * float(np.dot(wk[:order], prof[:order])) / n
    if correction_mode == "corrected":
        win_noise = s2 * float(np.dot(wk[order:2 * order], prof[order:2 * order])) / n
        value = head - bias + max(0.0, window - win_noise)
    else:
        k2 = float(prof[0]) if r.mode == "paper" else float(np.mean(prof[:order]))
        value = head - (1 if weighted else order) * k2 * s2 / n + window
    return value, head - bias


def ordinary_energy(r: DenoiseResult, basis: Optional[OrthonormalBasis] = None,
                    correction_mode: str = "corrected") -> EnergyEstimate:
    """Estimate ``G = ||f||^2_gamma`` from an adaptive fit.

    The variance is ``4 sigma^2 K^2 G / n`` with plug-in values; ``ci95`` is
    the Fisher-transform interval squared back to the energy scale.
    """
    c = r.all_coeffs.values
    m = r.m_n
    ones = np.ones(c.shape[0])
    value, trunc = _estimate(r, ones, m, r.tau_star, correction_mode, weighted=False)
    c2 = c[:m] * c[:m]
    tot = float(np.sum(c2))
    k2 = float(np.dot(r.profile[:m], c2) / tot) if tot > 0 else float(np.mean(r.profile[:m]))
    variance = 4 * r.sigma2_n * k2 * max(value, 0.0) / r.n
    fi = fisher_interval(value, r.n, r.sigma2_n, math.sqrt(k2))
    lo, hi = min(fi.lo, value), max(fi.hi, value)
    return EnergyEstimate(value, variance, (lo, hi), m, "ordinary", correction_mode, trunc,
                          math.sqrt(k2), value < 0)


def weighted_energy(s: Optional[SampledSignal], basis: OrthonormalBasis, w: EnergyWeight,
                    mode: str = "exact-design", correction_mode: str = "corrected",
                    paper_normalization: bool = False,
                    result: Optional[DenoiseResult] = None) -> EnergyEstimate:
    """Adaptive estimate of ``W_w(f) = sum_k w(k) c(k)^2``.

    The order is the minimiser of the weighted window statistic; ``result``
    may carry an existing fit of the same sample to avoid recomputation.
    """
    r = result if result is not None else denoise(s, basis, mode, paper_normalization)
    c = r.all_coeffs.values
    wk = w.values(c.shape[0])
    curve = tau_curve(c, r.n, wk)
    i = int(np.argmin(curve))
    order, window = i + 1, float(curve[i])
    value, trunc = _estimate(r, wk, order, window, correction_mode, weighted=True)
    c2 = c[:order] * c[:order]
    prof = r.profile[:order]
    w2 = wk[:order] ** 2
    s2, n = r.sigma2_n, r.n
    variance = 4 * s2 / n * float(np.dot(w2 * prof, c2)) + 3 * s2 * s2 / n ** 2 * float(np.dot(w2, prof * prof))
    denom = float(np.dot(wk[:order], c2))
    k2 = float(np.dot(w2 * prof, c2) / denom) if denom > 0 else float(np.mean(w2 * prof))
    sd = math.sqrt(variance)
    return EnergyEstimate(value, variance, (value - Z95 * sd, value + Z95 * sd), order, "weighted",
                          correction_mode, trunc, math.sqrt(k2), value < 0, w.theta)
