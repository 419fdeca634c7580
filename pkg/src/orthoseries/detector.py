"""Energy-based distortion monitoring over fixed-length windows."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .adaptive import denoise_batch
from .basis import OrthonormalBasis
from .design import SampledSignal
from .energy import FISHER_FACTOR, EnergyEstimate, EnergyWeight, ordinary_energy, weighted_energy

MIN_BASELINE = 3


@dataclass(frozen=True)
class BaselineRegion:
    center: float
    radius: float
    built_from: int
    theta: float
    window_length: int
    spread: float = 0.0

    def contains(self, root_energy: float) -> bool:
        return abs(root_energy - self.center) <= self.radius * (1 + 1e-12) + 1e-300


@dataclass(frozen=True)
class DetectionVerdict:
    window_index: int
    energy: float
    inside: bool
    consecutive_outside: int
    alarm: bool


def _stack(windows: Sequence[SampledSignal], n: int | None = None) -> np.ndarray:
    if not windows:
        raise ValueError("no windows supplied")
    n = windows[0].n if n is None else n
    for i, w in enumerate(windows):
        if w.n != n:
            raise ValueError(f"window {i} has length {w.n}, expected {n}")
    return np.column_stack([w.xi for w in windows])


def window_energies(xi: np.ndarray, basis: OrthonormalBasis, grid, theta: float = 0.0,
                    mode: str = "exact-design", correction_mode: str = "corrected",
                    coeffs: np.ndarray | None = None) -> list[tuple[EnergyEstimate, float]]:
    """Energy estimate and ``sigma^2(n)`` for every column of ``xi``."""
    results = denoise_batch(xi, basis, grid, mode, coeffs=coeffs)
    out = []
    for r in results:
        if theta == 0:
            e = ordinary_energy(r, basis, correction_mode)
        else:
            e = weighted_energy(None, basis, EnergyWeight(theta), mode, correction_mode, result=r)
        out.append((e, r.sigma2_n))
    return out


def baseline_from_energies(estimates: Sequence[tuple[EnergyEstimate, float]], n: int,
                           theta: float = 0.0) -> BaselineRegion:
    if len(estimates) < MIN_BASELINE:
        raise ValueError(f"baseline needs at least {MIN_BASELINE} windows")
    roots = np.array([math.sqrt(max(e.value, 0.0)) for e, _ in estimates])
    sigma = math.sqrt(float(np.mean([s2 for _, s2 in estimates])))
    k = float(np.mean([e.k_const for e, _ in estimates]))
    fisher = FISHER_FACTOR * sigma * k / math.sqrt(n)
    spread = float(np.std(roots, ddof=1))
    return BaselineRegion(float(np.mean(roots)), max(fisher, 2 * spread), len(estimates), theta, n, spread)


def build_baseline(windows: Sequence[SampledSignal], basis: OrthonormalBasis, theta: float = 0.0,
                   mode: str = "exact-design") -> BaselineRegion:
    """Mean root-energy of stationary windows with a Fisher-type radius.

    The radius is the larger of ``6 sigma K / sqrt(n)`` (pooled over the
    windows) and twice the empirical spread of the baseline root-energies.
    """
    xi = _stack(windows)
    est = window_energies(xi, basis, windows[0].grid, theta, mode)
    return baseline_from_energies(est, windows[0].n, theta)


def verdicts_from_energies(energies: Sequence[float], region: BaselineRegion,
                           alarm_threshold: int = 2) -> list[DetectionVerdict]:
    if alarm_threshold < 1:
        raise ValueError("alarm_threshold must be at least 1")
    out = []
    run = 0
    for i, e in enumerate(energies):
        inside = region.contains(math.sqrt(max(e, 0.0)))
        run = 0 if inside else run + 1
        out.append(DetectionVerdict(i, float(e), inside, run, run >= alarm_threshold))
    return out


def monitor(stream: Sequence[SampledSignal], region: BaselineRegion, basis: OrthonormalBasis,
            alarm_threshold: int = 2, mode: str = "exact-design") -> list[DetectionVerdict]:
    """Flag windows whose root-energy leaves the baseline region.

    An alarm is raised once ``alarm_threshold`` consecutive windows fall
    outside; a window back inside resets the counter.
    """
    xi = _stack(stream, region.window_length)
    est = window_energies(xi, basis, stream[0].grid, region.theta, mode)
    return verdicts_from_energies([e.value for e, _ in est], region, alarm_threshold)


def first_alarm(verdicts: Sequence[DetectionVerdict]) -> int | None:
    for v in verdicts:
        if v.alarm:
            return v.window_index
    return None
