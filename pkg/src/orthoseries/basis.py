"""Orthonormal polynomial systems relative to a signal weight.

Functions are indexed from 1 as in ``phi_1 .. phi_K`` with ``deg phi_k = k - 1``;
arrays use the 0-based degree as column index.  Recurrence coefficients come
from a discretised Stieltjes procedure on a Gauss-Jacobi rule matched to the
weight's endpoint exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .weights import DomainError, WeightConstants, WeightFunction, integrate, weight_constants


class BasisConstructionError(RuntimeError):
    pass


ORTHO_TOL = 1e-8
VALIDATE_DEGREES = 30


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Immutable recurrence table for ``phi_1 .. phi_{max_degree}``.

    The orthonormal recurrence is
    ``b[j+1] p_{j+1}(x) = (x - a[j]) p_j(x) - b[j] p_{j-1}(x)`` with
    ``p_0 = C0``; ``p_j`` is ``phi_{j+1}``.
    """

    weight: WeightFunction
    max_degree: int
    a: np.ndarray
    b: np.ndarray
    constants: WeightConstants
    ortho_error: float

    @property
    def triples(self) -> np.ndarray:
        """Rows ``(A, B, C)`` with ``p_{j+1} = (A x + B) p_j + C p_{j-1}``."""
        a, b = self.a[:-1], self.b[1:]
        return np.column_stack([1.0 / b, -a / b, -self.b[:-1] / b]) + 0.0

    def _check(self, x: np.ndarray, k_max: int):
        if k_max < 1 or k_max > self.max_degree:
            raise ValueError(f"k_max={k_max} outside 1..{self.max_degree}")
        lo, hi = self.weight.domain
        tol = 1e-12 * (hi - lo)
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise DomainError(f"evaluation points outside [{lo}, {hi}]")

    def blocks(self, x, k_max: int, block: int = 256) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(start, V)`` with ``V[j, i] = phi_{start+j+1}(x[i])``.

        Keeps memory at ``block * len(x)`` for high orders.
        """
        x = np.asarray(x, dtype=float).ravel()
        self._check(x, k_max)
        a, b = self.a, self.b
        prev = np.zeros_like(x)
        cur = np.full_like(x, self.constants.c0)
        for start in range(0, k_max, block):
            stop = min(start + block, k_max)
            out = np.empty((stop - start, x.size))
            for j in range(start, stop):
                out[j - start] = cur
                if j + 1 < k_max:
                    nxt = ((x - a[j]) * cur - b[j] * prev) / b[j + 1]
                    prev, cur = cur, nxt
            yield start, out

    def __call__(self, x, k_max: int | None = None) -> np.ndarray:
        """Matrix ``(len(x), k_max)`` of ``phi_1(x) .. phi_kmax(x)``."""
        k_max = self.max_degree if k_max is None else k_max
        x = np.asarray(x, dtype=float)
        cols = np.concatenate([blk for _, blk in self.blocks(x, k_max)], axis=0)
        return cols.T.reshape(x.shape + (k_max,))


def _stieltjes(x: np.ndarray, w: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, float]:
    a = np.zeros(k)
    b = np.zeros(k)
    c0 = float(np.sum(w)) ** -0.5
    prev = np.zeros_like(x)
    cur = np.full_like(x, c0)
    for j in range(k):
        wp = w * cur
        a[j] = np.dot(wp, x * cur)
        if j + 1 == k:
            break
        q = (x - a[j]) * cur - b[j] * prev
        b[j + 1] = np.sqrt(np.dot(w, q * q))
        prev, cur = cur, q / b[j + 1]
    return a, b, c0


def gram_matrix(basis: OrthonormalBasis, k_max: int, quad_order: int) -> np.ndarray:
    x, w = basis.weight.rule(quad_order)
    v = basis(x, k_max)
    return (v * w[:, None]).T @ v


@lru_cache(maxsize=16)
def build_basis(weight: WeightFunction, max_degree: int, quad_order: int = 512) -> OrthonormalBasis:
    """Build ``phi_1 .. phi_{max_degree}`` and validate orthonormality.

    Raises
    ------
    BasisConstructionError
        If any Gram entry for degrees up to 30 deviates from the identity by
        more than 1e-8; the message names the worst pair.
    """
    max_degree = int(max_degree)
    if max_degree < 2:
        raise ValueError("max_degree must be at least 2")
    constants = weight_constants(weight)
    order = max(quad_order, max_degree + 64)
    x, w = weight.rule(order)
    a, b, c0 = _stieltjes(x, w, max_degree)
    if weight.table is not None:
        # non-polynomial factor: confirm the discrete moments are converged
        x2, w2 = weight.rule(2 * order)
        a2, b2, _ = _stieltjes(x2, w2, min(max_degree, VALIDATE_DEGREES + 1))
        m = a2.size
        drift = max(np.max(np.abs(a[:m] - a2)), np.max(np.abs(b[:m] - b2)))
        if drift > 1e-9:
            raise BasisConstructionError(f"recurrence not converged in quadrature (drift {drift:.2e})")
    basis = OrthonormalBasis(weight, max_degree, a, b, constants, np.nan)
    kv = min(max_degree, VALIDATE_DEGREES + 1)
    # independent rule order from the construction rule
    g = gram_matrix(basis, kv, max(2 * kv + 17, 97))
    err = np.abs(g - np.eye(kv))
    worst = np.unravel_index(np.argmax(err), err.shape)
    if err[worst] > ORTHO_TOL:
        j, k = worst
        raise BasisConstructionError(
            f"orthonormality error {err[worst]:.3e} at (phi_{j + 1}, phi_{k + 1})"
        )
    object.__setattr__(basis, "ortho_error", float(err[worst]))
    a.setflags(write=False)
    b.setflags(write=False)
    return basis


def eval_basis(basis: OrthonormalBasis, x, k_max: int) -> np.ndarray:
    """``phi_1(x) .. phi_{k_max}(x)`` for a scalar or array ``x``."""
    return basis(x, k_max)


def gamma_quadrature(basis: OrthonormalBasis, integrand: Callable, quad_order: int = 512) -> float:
    """Approximate ``integral integrand(x) gamma(x) dx``."""
    value, _ = integrate(basis.weight, integrand, min(quad_order, 1024))
    return value


def sup_norms(basis: OrthonormalBasis, grid: np.ndarray, k_max: int) -> np.ndarray:
    """Maximum of ``|phi_k|`` over the grid for k = 1..k_max."""
    out = np.empty(k_max)
    for start, v in basis.blocks(grid, k_max):
        out[start:start + v.shape[0]] = np.max(np.abs(v), axis=1)
    return out


def lipschitz_constants(basis: OrthonormalBasis, grid: np.ndarray, k_max: int) -> np.ndarray:
    """Measured ``max |phi_k(x) - phi_k(y)| / (k |x - y|)`` over grid neighbours."""
    grid = np.sort(np.asarray(grid, dtype=float))
    dx = np.diff(grid)
    out = np.empty(k_max)
    for start, v in basis.blocks(grid, k_max):
        ks = np.arange(start + 1, start + v.shape[0] + 1)
        out[start:start + v.shape[0]] = np.max(np.abs(np.diff(v, axis=1)) / dx, axis=1) / ks
    return out
