"""Uniform design grids, noise laws and synthetic spectral-decay signals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy.special import gamma as gamma_fn, zeta

from .basis import OrthonormalBasis

MIN_N = 15
LAWS = ("gaussian", "uniform", "symmetric-weibull-tail")


@dataclass(frozen=True)
class DesignGrid:
    n: int
    points: np.ndarray = field(repr=False)
    domain: tuple[float, float] = (-1.0, 1.0)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


def make_grid(n: int, domain: tuple[float, float] = (-1.0, 1.0)) -> DesignGrid:
    """``x(i, n) = (2i - n - 1) / (n - 1)``, mapped affinely onto ``domain``."""
    n = int(n)
    if n < MIN_N:
        raise ValueError(f"n={n} is below the minimum sample size {MIN_N}")
    i = np.arange(1, n + 1, dtype=float)
    t = (2 * i - n - 1) / (n - 1)
    t[0], t[-1] = -1.0, 1.0
    lo, hi = domain
    if (lo, hi) == (-1.0, 1.0):
        x = t
    else:
        x = lo + (hi - lo) * (1 + t) / 2
        x[0], x[-1] = lo, hi
    x.setflags(write=False)
    return DesignGrid(n, x, (float(lo), float(hi)))


def grid_for(basis: OrthonormalBasis, n: int) -> DesignGrid:
    return make_grid(n, basis.weight.domain)


def replication_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for replication ``keys`` of a seeded experiment."""
    keys = keys or (0,)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


@dataclass(frozen=True)
class NoiseModel:
    """Unit-variance, centred noise scaled by ``sigma``.

    ``q`` and ``Q`` are the tail parameters with
    ``max(P(e > u), P(e < -u)) <= exp(-(u / Q)**q)``.  For ``gaussian`` and
    ``uniform`` they are fixed at (2, 1); for ``symmetric-weibull-tail`` the
    shape is ``q`` and ``Q`` is implied by unit variance.
    """

    law: str = "gaussian"
    sigma: float = 1.0
    q: float = 2.0
    Q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown noise law {self.law!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.law == "symmetric-weibull-tail":
            if self.q <= 0:
                raise ValueError("tail exponent q must be positive")
            object.__setattr__(self, "Q", weibull_scale(self.q))
        else:
            object.__setattr__(self, "q", 2.0)
            object.__setattr__(self, "Q", 1.0)

    def unit(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.law == "gaussian":
            return rng.standard_normal(size)
        if self.law == "uniform":
            r3 = math.sqrt(3.0)
            return rng.uniform(-r3, r3, size)
        mag = self.Q * rng.weibull(self.q, size)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * mag

    def tail_bound(self, u) -> np.ndarray:
        return np.exp(-(np.asarray(u, dtype=float) / self.Q) ** self.q)


def weibull_scale(q: float) -> float:
    """Scale ``s`` giving a symmetric Weibull(q, s) variable unit variance."""
    return float(gamma_fn(1.0 + 2.0 / q) ** -0.5)


SIGN_CONVENTIONS = ("constant", "alternating", "random")


@dataclass(frozen=True)
class SpectralDecayModel:
    """Coefficients ``c(k) = s_k * c_scale * k**(-delta - 1/2) * sqrt(L(k))``.

    ``L(k) = (1 + log k)**log_power``, so the tail sum of squares behaves
    like ``N**(-2 delta) L(N)``.
    """

    delta: float
    log_power: float = 0.0
    coeff_signs: str = "random"
    c_scale: float = 1.0
    sign_seed: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("decay exponent delta must be positive")
        if not -2.0 <= self.log_power <= 2.0:
            raise ValueError("log_power must lie in [-2, 2]")
        if self.coeff_signs not in SIGN_CONVENTIONS:
            raise ValueError(f"coeff_signs must be one of {SIGN_CONVENTIONS}")

    def squared(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return self.c_scale ** 2 * k ** (-2 * self.delta - 1) * (1 + np.log(k)) ** self.log_power

    def tail(self, N: int, k_max: Optional[int] = None) -> float:
        """Tail ``rho(N)``.

        Without a log factor this is a Hurwitz zeta value.  Otherwise terms up
        to ``k_max`` are summed and the remainder integrated from
        ``k_max + 1/2`` in the variable ``log t``.
        """
        N = int(N)
        s = 2 * self.delta + 1
        if self.log_power == 0:
            return float(self.c_scale ** 2 * zeta(s, N + 1))
        k_max = max(N, 4096) if k_max is None else max(int(k_max), N)
        head = float(np.sum(self.squared(np.arange(N + 1, k_max + 1))))
        u0 = math.log(k_max + 0.5)
        rest, _ = _integrate.quad(
            lambda u: math.exp(-(s - 1) * u) * (1 + u) ** self.log_power, u0, np.inf, limit=200)
        return head + self.c_scale ** 2 * rest


def synth_coefficients(model: SpectralDecayModel, k_max: int) -> np.ndarray:
    k = np.arange(1, int(k_max) + 1)
    mag = np.sqrt(model.squared(k))
    if model.coeff_signs == "constant":
        sign = np.ones(k.size)
    elif model.coeff_signs == "alternating":
        sign = np.where(k % 2 == 1, 1.0, -1.0)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(model.sign_seed, spawn_key=(7,)))
        sign = np.where(rng.random(k.size) < 0.5, -1.0, 1.0)
        sign[0] = 1.0
    return sign * mag


@dataclass(frozen=True)
class SampledSignal:
    grid: DesignGrid
    xi: np.ndarray = field(repr=False)
    truth: Optional[np.ndarray] = field(default=None, repr=False)
    sigma_true: Optional[float] = None

    def __post_init__(self):
        if len(self.xi) != self.grid.n:
            raise ValueError(f"{len(self.xi)} observations for a grid of {self.grid.n}")

    @property
    def n(self) -> int:
        return self.grid.n


def signal_values(truth: np.ndarray, basis: OrthonormalBasis, x) -> np.ndarray:
    """``f(x) = sum_k c(k) phi_k(x)`` for a coefficient vector."""
    truth = np.asarray(truth, dtype=float)
    if truth.size > basis.max_degree:
        raise ValueError(f"truth has {truth.size} terms; basis holds {basis.max_degree}")
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.size)
    for start, v in basis.blocks(x, truth.size):
        out += truth[start:start + v.shape[0]] @ v
    return out.reshape(x.shape)


def sample_signal(truth: np.ndarray, basis: OrthonormalBasis, grid: DesignGrid,
                  noise: NoiseModel, rep: int = 0) -> SampledSignal:
    """``xi(i) = f(x(i)) + sigma * eps(i)``, reproducible from ``noise.seed`` and ``rep``."""
    if tuple(grid.domain) != tuple(basis.weight.domain):
        raise ValueError(f"grid domain {grid.domain} does not match basis domain {basis.weight.domain}")
    f = signal_values(truth, basis, grid.points)
    eps = noise.unit(replication_rng(noise.seed, rep), grid.n)
    xi = f + noise.sigma * eps
    return SampledSignal(grid, xi, np.asarray(truth, dtype=float).copy(), noise.sigma)


def tail_ratio_check(source, N_list: Sequence[int], lo: float = 0.05, hi: float = 0.95) -> dict:
    """Ratios ``rho(2N) / rho(N)`` and whether the ratio condition looks plausible.

    ``source`` is a SpectralDecayModel (tails completed analytically) or a
    finite coefficient vector.
    """
    ratios = []
    for N in N_list:
        if isinstance(source, SpectralDecayModel):
            r0, r1 = source.tail(N), source.tail(2 * N)
        else:
            c2 = np.asarray(source, dtype=float) ** 2
            r0, r1 = float(np.sum(c2[N:])), float(np.sum(c2[2 * N:]))
        ratios.append(r1 / r0 if r0 > 0 else math.nan)
    if not ratios or any(math.isnan(r) for r in ratios):
        verdict = "inapplicable"
    else:
        verdict = "plausible" if all(lo < r < hi for r in ratios) else "violated"
    return {"N": list(map(int, N_list)), "ratios": ratios, "verdict": verdict}
