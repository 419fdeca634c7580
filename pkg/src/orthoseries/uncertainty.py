"""Error-size proxies and the 95% loss bound for an adaptive fit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adaptive import DenoiseResult, tails

QUANTILE_FACTOR = 2.54


def window_noise(r: DenoiseResult) -> float:
    """Expected noise energy ``sigma^2(n) * sum_{k=M+1}^{2M} s_k / n`` inside tau*."""
    m = r.m_n
    return r.sigma2_n * float(np.sum(r.profile[m:2 * m])) / r.n


def k_const_sq(r: DenoiseResult) -> float:
    """``K(gamma)^2`` in paper mode, the mean of ``s_k`` over k <= M otherwise."""
    return float(np.mean(r.profile[:r.m_n]))


def estimate_tail(r: DenoiseResult, k_const: Optional[float] = None) -> float:
    """``max(0, tau* - sigma^2(n) K^2 M / n)``.

    Without ``k_const`` the per-coefficient noise profile of the result is
    summed over the tau* window, which equals the scalar form in paper mode.
    """
    if k_const is None:
        noise = window_noise(r)
    else:
        noise = r.sigma2_n * k_const ** 2 * r.m_n / r.n
    return max(0.0, r.tau_star - noise)


@dataclass(frozen=True)
class ConfidenceReport:
    tau_star: float
    delta_n: float
    bound95: float
    rho_hat: float
    mode: str
    quantile_factor: float = QUANTILE_FACTOR


def confidence_report(r: DenoiseResult, basis=None, quantile_factor: float = QUANTILE_FACTOR) -> ConfidenceReport:
    """``delta^2 = 4 s2 K^2 rho_hat / n + 3 s2^2 K^4 M / n^2``; bound = tau* + q * delta."""
    rho_hat = estimate_tail(r)
    k2 = k_const_sq(r)
    s2, n = r.sigma2_n, r.n
    delta2 = 4 * s2 * k2 * rho_hat / n + 3 * s2 * s2 * k2 * k2 * r.m_n / n ** 2
    delta = float(np.sqrt(max(delta2, 0.0)))
    return ConfidenceReport(r.tau_star, delta, r.tau_star + quantile_factor * delta, rho_hat, r.mode,
                            quantile_factor)


def true_error(r: DenoiseResult, truth: Optional[np.ndarray]) -> float:
    """``||f_hat - f||^2_gamma`` by Parseval from known coefficients."""
    if truth is None:
        raise ValueError("true coefficients are required")
    truth = np.asarray(truth, dtype=float)
    m = r.m_n
    head = np.zeros(m)
    head[:min(m, truth.size)] = truth[:m]
    diff = r.coeffs.values - head
    rho = tails(truth)
    return float(np.dot(diff, diff) + rho[min(m, truth.size)])
