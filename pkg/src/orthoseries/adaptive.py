"""Adaptive projection estimator.

The truncation order is the minimiser ``M(n)`` of the window energy
``tau(N, n) = sum_{k=N+1}^{2N} c(k, n)^2`` over ``N in [1, floor(n/3)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import OrthonormalBasis
from .coefficients import CoefficientSet, empirical_coefficients, k_cap, noise_profile, project
from .design import MIN_N, SampledSignal, signal_values


def tau(c: CoefficientSet | np.ndarray, N: int) -> float:
    values = c.values if isinstance(c, CoefficientSet) else np.asarray(c)
    if N < 1 or 2 * N > values.shape[0]:
        raise ValueError(f"window ({N}, {2 * N}] exceeds {values.shape[0]} coefficients")
    w = values[N:2 * N]
    return float(np.dot(w, w))


def tau_curve(values: np.ndarray, n: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """``tau(N, n)`` for N = 1..floor(n/3) (index N-1)."""
    top = int(n) // 3
    if values.shape[0] < 2 * top:
        raise ValueError(f"need {2 * top} coefficients, have {values.shape[0]}")
    e = values[:2 * top] ** 2
    if weights is not None:
        e = e * weights[:2 * top]
    csum = np.concatenate([[0.0], np.cumsum(e)])
    N = np.arange(1, top + 1)
    return csum[2 * N] - csum[N]


def select_order(c: CoefficientSet | np.ndarray, n: int,
                 weights: Optional[np.ndarray] = None) -> tuple[int, float]:
    """Adaptive order and ``tau*``; ties go to the smallest N."""
    if n < MIN_N:
        raise ValueError(f"n={n} is below {MIN_N}")
    values = c.values if isinstance(c, CoefficientSet) else np.asarray(c)
    curve = tau_curve(values, n, weights)
    m = int(np.argmin(curve))
    return m + 1, float(curve[m])


@dataclass(frozen=True)
class DenoiseResult:
    """Adaptive fit.  ``all_coeffs`` holds every coefficient up to 2*floor(n/3)."""

    m_n: int
    all_coeffs: CoefficientSet = field(repr=False)
    tau_star: float
    sigma2_n: float
    mode: str
    profile: np.ndarray = field(repr=False)
    n: int

    @property
    def coeffs(self) -> CoefficientSet:
        return self.all_coeffs.truncated(self.m_n)

    @property
    def paper_normalization(self) -> bool:
        return self.all_coeffs.paper_normalization


def fitted_values(coeffs: np.ndarray, basis: OrthonormalBasis, x) -> np.ndarray:
    return signal_values(coeffs, basis, x)


def residual_variance(xi: np.ndarray, fitted: np.ndarray, m: int) -> float:
    """``(n - m - 1)^-1 sum (fitted - xi)^2``."""
    dof = xi.size - m - 1
    if dof <= 0:
        raise ValueError("degenerate residual degrees of freedom")
    r = fitted - xi
    return float(np.dot(r, r) / dof)


def fit_from_coefficients(all_coeffs: CoefficientSet, xi: np.ndarray, basis: OrthonormalBasis,
                          x: np.ndarray, profile: np.ndarray, mode: str = "exact-design") -> DenoiseResult:
    n = xi.size
    m, tstar = select_order(all_coeffs, n)
    fitted = fitted_values(all_coeffs.values[:m], basis, x)
    return DenoiseResult(m, all_coeffs, tstar, residual_variance(xi, fitted, m), mode, profile, n)


def denoise(s: SampledSignal, basis: OrthonormalBasis, mode: str = "exact-design",
            paper_normalization: bool = False) -> DenoiseResult:
    """Adaptive estimate ``sum_{k <= M(n)} c(k, n) phi_k``, with ``sigma^2(n)``."""
    cap = k_cap(s.n)
    if basis.max_degree < cap:
        raise ValueError(f"basis holds {basis.max_degree} functions; need {cap} for n={s.n}")
    c = empirical_coefficients(s, basis, cap, paper_normalization)
    profile = noise_profile(basis, s.grid, cap, mode, paper_normalization)
    return fit_from_coefficients(c, s.xi, basis, s.grid.points, profile, mode)


def denoise_batch(xi: np.ndarray, basis: OrthonormalBasis, grid, mode: str = "exact-design",
                  paper_normalization: bool = False, coeffs: Optional[np.ndarray] = None) -> list[DenoiseResult]:
    """Fit every column of an ``(n, R)`` observation matrix on one grid.

    ``coeffs`` may supply the precomputed ``(2*floor(n/3), R)`` coefficient
    matrix (coefficients are linear in the observations).
    """
    xi = np.asarray(xi, dtype=float)
    n = grid.n
    cap = k_cap(n)
    if coeffs is None:
        coeffs = project(xi, basis, grid, cap, paper_normalization)
    profile = noise_profile(basis, grid, cap, mode, paper_normalization)
    orders = [select_order(coeffs[:, j], n) for j in range(xi.shape[1])]
    top = max(m for m, _ in orders)
    v = basis(grid.points, top)
    out = []
    for j, (m, tstar) in enumerate(orders):
        c = CoefficientSet(np.ascontiguousarray(coeffs[:, j]), "empirical", n, paper_normalization)
        fitted = v[:, :m] @ c.values[:m]
        out.append(DenoiseResult(m, c, tstar, residual_variance(xi[:, j], fitted, m), mode, profile, n))
    return out


def eval_estimate(r: DenoiseResult, basis: OrthonormalBasis, x) -> np.ndarray:
    return fitted_values(r.coeffs.values, basis, x)


def estimate_sigma2(s: SampledSignal, r: DenoiseResult, basis: OrthonormalBasis) -> float:
    return residual_variance(s.xi, eval_estimate(r, basis, s.grid.points), r.m_n)


@dataclass(frozen=True)
class OracleReport:
    n0: int
    a_star: float
    a_curve: np.ndarray = field(repr=False)
    ratio_7a: float


def tails(truth: np.ndarray) -> np.ndarray:
    """``rho(N)`` for N = 0..len(truth), computed from the far end."""
    c2 = np.asarray(truth, dtype=float) ** 2
    return np.concatenate([np.cumsum(c2[::-1])[::-1], [0.0]])


def oracle_curve(truth: np.ndarray, n: int, variance: Optional[np.ndarray] = None) -> OracleReport:
    """``A(N, n) = rho(N) + N/n`` over N = 1..floor(n/3).

    ``variance`` optionally replaces ``N/n`` by ``sum_{k<=N} variance[k-1] / n``.
    """
    top = int(n) // 3
    rho = tails(truth)
    N = np.arange(1, top + 1)
    bias = rho[np.minimum(N, rho.size - 1)]
    if variance is None:
        var = N / n
    else:
        var = np.cumsum(np.asarray(variance, dtype=float)[:top]) / n
    a = bias + var
    i = int(np.argmin(a))
    return OracleReport(i + 1, float(a[i]), a, (i + 1) / np.sqrt(n))
