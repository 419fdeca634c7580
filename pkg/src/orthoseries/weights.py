"""Signal weights on a closed interval and their derived constants.

A weight has the form ``scale * h(x) * (hi - x)**exp_hi * (x - lo)**exp_lo``
where ``h`` is a smooth positive factor (identically one except for tabulated
weights).  Endpoint values are redefined to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import beta as beta_fn

from .quadrature import gauss_jacobi_rule

KINDS = ("jacobi", "beta01", "custom-tabulated")


class InadmissibleWeight(ValueError):
    """Raised when a weight violates the integrability conditions."""


class DomainError(ValueError):
    """Raised when a point lies outside the weight's domain."""


@dataclass(frozen=True)
class WeightFunction:
    """Signal weight gamma(x).

    For ``jacobi`` the weight is ``(1 - x)**alpha * (1 + x)**beta`` on
    [-1, 1].  For ``beta01`` it is the Beta(alpha, beta) density on [0, 1].
    ``custom-tabulated`` multiplies a Jacobi endpoint factor by a cubic
    spline through positive tabulated values.
    """

    kind: str
    alpha: float
    beta: float
    lo: float
    hi: float
    exp_hi: float
    exp_lo: float
    scale: float = 1.0
    table: Optional[tuple] = field(default=None, compare=True)

    @property
    def domain(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def kappa(self) -> float:
        """Growth exponent of |gamma'| near the endpoints (0 when bounded)."""
        return max(0.0, -self.exp_hi, -self.exp_lo)

    def factor(self) -> Optional[Callable]:
        if self.table is None:
            return None
        return _spline(self.table)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * self.length
        if np.any(x < self.lo - tol) or np.any(x > self.hi + tol):
            raise DomainError(f"points outside [{self.lo}, {self.hi}]")
        out = np.zeros_like(x)
        inner = (x > self.lo) & (x < self.hi)
        xi = x[inner]
        vals = self.scale * (self.hi - xi) ** self.exp_hi * (xi - self.lo) ** self.exp_lo
        h = self.factor()
        if h is not None:
            vals = vals * h(xi)
        out[inner] = vals
        return out

    def rule(self, order: int, shift: float = 0.0):
        """Nodes and weights integrating ``g(x) * gamma(x) * ((hi-x)(x-lo))**shift``.

        The smooth factor ``h`` is folded into the returned weights.
        """
        p, q = self.exp_hi + shift, self.exp_lo + shift
        if p <= -1.0 or q <= -1.0:
            raise InadmissibleWeight(
                f"endpoint exponents ({p:.3g}, {q:.3g}) are not integrable"
            )
        x, w = gauss_jacobi_rule(order, p, q, self.lo, self.hi)
        w = w * self.scale
        h = self.factor()
        if h is not None:
            w = w * h(x)
        return x, w

    def describe(self) -> dict:
        d = {"kind": self.kind, "alpha": self.alpha, "beta": self.beta,
             "domain": [self.lo, self.hi]}
        if self.table is not None:
            d["table_size"] = len(self.table[0])
        return d


_SPLINES: dict = {}


def _spline(table):
    s = _SPLINES.get(table)
    if s is None:
        xs, ys = (np.asarray(t, dtype=float) for t in table)
        s = CubicSpline(xs, ys)
        _SPLINES[table] = s
    return s


def make_weight(kind: str, alpha: float, beta: float, table=None) -> WeightFunction:
    """Construct an admissible weight.

    Parameters
    ----------
    kind : {"jacobi", "beta01", "custom-tabulated"}
    alpha, beta : float
        Jacobi exponents (``jacobi``, ``custom-tabulated``) or Beta shape
        parameters (``beta01``).
    table : pair of sequences, optional
        ``(x, h)`` samples of the smooth positive factor, required for
        ``custom-tabulated``.  ``x`` must span [-1, 1].
    """
    alpha, beta = float(alpha), float(beta)
    if kind == "jacobi":
        if alpha <= -0.5 or beta <= -0.5:
            raise InadmissibleWeight("jacobi weight needs alpha > -1/2 and beta > -1/2")
        return WeightFunction("jacobi", alpha, beta, -1.0, 1.0, alpha, beta)
    if kind == "beta01":
        if alpha <= 0 or beta <= 0:
            raise InadmissibleWeight("beta01 weight needs alpha > 0 and beta > 0")
        # x**(alpha-1) * (1-x)**(beta-1) / B(alpha, beta)
        return WeightFunction("beta01", alpha, beta, 0.0, 1.0, beta - 1.0, alpha - 1.0,
                              scale=1.0 / float(beta_fn(alpha, beta)))
    if kind == "custom-tabulated":
        if alpha <= -0.5 or beta <= -0.5:
            raise InadmissibleWeight("endpoint exponents must exceed -1/2")
        if table is None:
            raise ValueError("custom-tabulated weight needs a (x, h) table")
        xs = tuple(float(v) for v in table[0])
        hs = tuple(float(v) for v in table[1])
        if len(xs) != len(hs) or len(xs) < 4:
            raise ValueError("table needs at least 4 (x, h) pairs of equal length")
        if xs[0] > -1.0 or xs[-1] < 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("table x must be increasing and span [-1, 1]")
        if min(hs) <= 0:
            raise InadmissibleWeight("tabulated factor must be positive")
        return WeightFunction("custom-tabulated", alpha, beta, -1.0, 1.0, alpha, beta,
                              table=(xs, hs))
    raise ValueError(f"unknown weight kind {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class WeightConstants:
    k_gamma: float
    mass: float
    c0: float
    c1: float
    lam: float
    quad_order: int


def integrate(w: WeightFunction, g: Callable, quad_order: int = 32, shift: float = 0.0,
              tol: float = 1e-10, max_order: int = 1 << 13) -> tuple[float, int]:
    """Integrate ``g * gamma`` (times the optional endpoint shift) adaptively.

    The order is doubled from ``quad_order`` until two successive values
    agree to ``tol`` (relative to ``max(1, |value|)``).  Returns
    ``(value, order_used)``.  Orders are capped because the library
    Gauss-Jacobi nodes lose accuracy beyond a few thousand points.
    """
    order = int(quad_order)
    x, wt = w.rule(order, shift)
    prev = float(np.dot(wt, g(x)))
    while True:
        if not math.isfinite(prev):
            raise FloatingPointError("non-finite integrand at quadrature nodes")
        nxt_order = order * 2
        x, wt = w.rule(nxt_order, shift)
        val = float(np.dot(wt, g(x)))
        if abs(val - prev) <= tol * max(1.0, abs(val)):
            return val, nxt_order
        if nxt_order >= max_order:
            raise FloatingPointError(
                f"quadrature did not converge (last change {abs(val - prev):.3g})"
            )
        order, prev = nxt_order, val


def weight_constants(w: WeightFunction, quad_order: int = 32) -> WeightConstants:
    """K(gamma), mass, C0, C1 and lambda from their defining integrals.

    ``K(gamma) = (2 pi)^-1 * integral gamma(x) / sqrt((x - lo)(hi - x)) dx``,
    which on [-1, 1] is the usual arcsine-weighted integral.
    """
    try:
        raw_k, order = integrate(w, lambda x: np.ones_like(x), quad_order, shift=-0.5)
    except InadmissibleWeight as exc:
        raise InadmissibleWeight(f"K(gamma) diverges: {exc}") from exc
    mass, _ = integrate(w, lambda x: np.ones_like(x), quad_order)
    first, _ = integrate(w, lambda x: x, quad_order)
    c1 = first / mass
    second, _ = integrate(w, lambda x: (x - c1) ** 2, quad_order)
    k_gamma = raw_k / (2.0 * math.pi)
    if not (mass > 0 and second > 0 and 0 < k_gamma < math.inf):
        raise InadmissibleWeight("degenerate weight moments")
    return WeightConstants(k_gamma=k_gamma, mass=mass, c0=mass ** -0.5, c1=c1,
                           lam=second ** -0.5, quad_order=order)


def jacobi_closed_forms(alpha: float, beta: float) -> dict:
    """Closed-form constants for the Jacobi weight, as printed in the source.

    ``k_gamma_printed`` and ``lambda_inv2_printed`` are known to disagree
    with the defining integrals (by a factor 2 and 3 respectively at
    alpha = beta = 0); ``k_gamma_consistent`` is the corrected form.
    """
    a, b = alpha, beta
    mass = 2.0 ** (a + b + 1) * beta_fn(a + 1, b + 1)
    poly = (3 * a * a * b + 3 * a * b * b + 3 * a * a + 3 * b * b + 16 * a * b
            + 14 * a + 14 * b + 12)
    return {
        "mass": float(mass),
        "c1": (b - a) / (a + b + 2),
        "lambda_inv2_printed": float(mass * poly / ((a + b + 3) * (a + b + 2) ** 2)),
        "k_gamma_printed": float(2.0 ** (a + b) / math.pi * beta_fn(a + 0.5, b + 0.5)),
        "k_gamma_consistent": float(2.0 ** (a + b) / (2 * math.pi) * beta_fn(a + 0.5, b + 0.5)),
    }
