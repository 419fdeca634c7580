"""Exact, Riemann-sum and empirical Fourier-Riesz coefficients.

Sums ``n^-1 sum_i g(x_i)`` approximate the domain average of ``g``, not its
integral.  By default they are multiplied by the domain length so that the
sample coefficients target ``c(k)`` itself ("grid-consistent"
normalisation); ``paper_normalization=True`` keeps the bare ``1/n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import OrthonormalBasis
from .design import DesignGrid, SampledSignal


@dataclass(frozen=True)
class CoefficientSet:
    values: np.ndarray = field(repr=False)
    kind: str
    n: int | None = None
    paper_normalization: bool = False

    @property
    def k_max(self) -> int:
        return int(self.values.shape[0])

    def truncated(self, m: int) -> "CoefficientSet":
        return CoefficientSet(self.values[:m], self.kind, self.n, self.paper_normalization)


def k_cap(n: int) -> int:
    """Largest coefficient index ever formed for a sample of size n."""
    return 2 * (int(n) // 3)


def sum_factor(grid: DesignGrid, paper_normalization: bool = False) -> float:
    return (1.0 if paper_normalization else grid.length) / grid.n


def project(values: np.ndarray, basis: OrthonormalBasis, grid: DesignGrid, k_max: int,
            paper_normalization: bool = False) -> np.ndarray:
    """``F * sum_i values[i] phi_k(x_i) gamma(x_i)`` for k = 1..k_max.

    ``values`` may be ``(n,)`` or ``(n, R)``; the result is ``(k_max,)`` or
    ``(k_max, R)``.  Endpoints carry zero weight.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.n:
        raise ValueError("values do not match the grid size")
    g = basis.weight(grid.points)
    wv = values * (g if values.ndim == 1 else g[:, None])
    out = np.empty((k_max,) + values.shape[1:])
    for start, v in basis.blocks(grid.points, k_max):
        out[start:start + v.shape[0]] = v @ wv
    return out * sum_factor(grid, paper_normalization)


def exact_coefficients(f: Callable, basis: OrthonormalBasis, k_max: int,
                       quad_order: int = 64, tol: float = 1e-10) -> CoefficientSet:
    """``c(k) = integral f phi_k gamma dx`` with order doubling until stable."""
    order = max(int(quad_order), k_max + 32)
    prev = None
    while order <= max(1 << 13, 4 * k_max):
        x, w = basis.weight.rule(order)
        fw = np.asarray(f(x), dtype=float) * w
        if not np.all(np.isfinite(fw)):
            raise FloatingPointError("integrand is not finite at quadrature nodes")
        vals = np.zeros(k_max)
        for start, v in basis.blocks(x, k_max):
            vals[start:start + v.shape[0]] = v @ fw
        if prev is not None and np.max(np.abs(vals - prev)) <= tol * max(1.0, np.max(np.abs(vals))):
            return CoefficientSet(vals, "exact")
        prev, order = vals, order * 2
    raise FloatingPointError("coefficient quadrature did not converge")


def riemann_coefficients(f: Callable, basis: OrthonormalBasis, grid: DesignGrid, k_max: int,
                         paper_normalization: bool = False) -> CoefficientSet:
    """Noiseless sums ``c_n(k)`` of ``f phi_k gamma`` over the grid."""
    vals = project(np.asarray(f(grid.points), dtype=float), basis, grid, k_max, paper_normalization)
    return CoefficientSet(vals, "riemann", grid.n, paper_normalization)


def empirical_coefficients(s: SampledSignal, basis: OrthonormalBasis, k_max: int | None = None,
                           paper_normalization: bool = False) -> CoefficientSet:
    """Noisy sums ``c(k, n)`` of ``xi phi_k gamma`` over the grid."""
    cap = k_cap(s.n)
    k_max = cap if k_max is None else int(k_max)
    if k_max > cap:
        raise ValueError(f"k_max={k_max} exceeds 2*floor(n/3)={cap}")
    if k_max > basis.max_degree:
        raise ValueError(f"basis holds {basis.max_degree} functions; {k_max} requested")
    vals = project(s.xi, basis, s.grid, k_max, paper_normalization)
    return CoefficientSet(vals, "empirical", s.n, paper_normalization)


def design_variances(basis: OrthonormalBasis, grid: DesignGrid, k_max: int) -> np.ndarray:
    """``v_k(n) = n^-1 sum_i phi_k(x_i)^2 gamma(x_i)^2`` for k = 1..k_max."""
    g2 = basis.weight(grid.points) ** 2
    out = np.empty(k_max)
    for start, v in basis.blocks(grid.points, k_max):
        out[start:start + v.shape[0]] = (v * v) @ g2
    return out / grid.n


def design_variance(basis: OrthonormalBasis, grid: DesignGrid, k: int) -> float:
    return float(design_variances(basis, grid, k)[k - 1])


MODES = ("exact-design", "paper")


def noise_profile(basis: OrthonormalBasis, grid: DesignGrid, k_max: int, mode: str = "exact-design",
                  paper_normalization: bool = False) -> np.ndarray:
    """Per-coefficient factors ``s_k`` with ``Var c(k, n) ~ sigma^2 s_k / n``.

    Exact-design mode uses the grid sums (times the squared length factor
    under grid-consistent normalisation); paper mode uses ``K(gamma)^2``.
    """
    if mode == "paper":
        return np.full(k_max, basis.constants.k_gamma ** 2)
    if mode != "exact-design":
        raise ValueError(f"mode must be one of {MODES}")
    scale = 1.0 if paper_normalization else grid.length ** 2
    return scale * design_variances(basis, grid, k_max)
