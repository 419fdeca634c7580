"""Gauss-Jacobi rules on arbitrary intervals."""

from __future__ import annotations

from functools import lru_cache

from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=64)
def _canonical(order: int, p: float, q: float):
    if p == 0.0 and q == 0.0:
        t, w = roots_legendre(order)
    else:
        t, w = roots_jacobi(order, p, q)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_jacobi_rule(order: int, p: float, q: float, lo: float = -1.0, hi: float = 1.0):
    """Rule for ``integral_lo^hi g(x) (hi - x)**p (x - lo)**q dx``.

    Exact for polynomial ``g`` of degree below ``2 * order``.
    """
    if order < 1:
        raise ValueError("quadrature order must be positive")
    t, w = _canonical(int(order), float(p), float(q))
    half = 0.5 * (hi - lo)
    x = lo + half * (1.0 + t)
    return x, w * half ** (p + q + 1.0)
