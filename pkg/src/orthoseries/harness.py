"""Monte Carlo studies of rates, coverage, constants and detection.

Replications are processed in fixed-size chunks with per-replication seeds
derived from ``(seed, n, replication)``, so reports do not depend on the
number of worker threads.  BLAS is pinned to one thread during a study.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from .adaptive import denoise_batch, oracle_curve, tails
from .basis import OrthonormalBasis, build_basis, gamma_quadrature
from .coefficients import k_cap, noise_profile, project
from .design import (NoiseModel, SpectralDecayModel, grid_for, replication_rng, signal_values,
                     synth_coefficients)
from .detector import baseline_from_energies, first_alarm, verdicts_from_energies, window_energies
from .energy import EnergyWeight, fisher_interval, ordinary_energy, weighted_energy, weighted_energy_truth
from .io import SCHEMA
from .uncertainty import confidence_report, true_error
from .weights import make_weight

STUDIES = ("rate", "coverage", "constant", "detector")


@dataclass
class ExperimentConfig:
    study: str = "rate"
    n_list: list = field(default_factory=lambda: [1000, 4000, 16000])
    replications: int = 100
    delta: list = field(default_factory=lambda: [1.0])
    theta: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    weight: str = "jacobi"
    sigma: float = 0.2
    law: str = "gaussian"
    seed: int = 0
    modes: list = field(default_factory=lambda: ["exact-design"])
    coeff_signs: str = "random"
    log_power: float = 0.0
    truth_terms: Optional[int] = None
    paper_normalization: bool = False
    chunk: int = 25
    workers: int = 1
    # coverage / constant / detector knobs
    bound_coverage_min: float = 0.85
    fisher_coverage_min: float = 0.90
    normality_alpha: float = 0.01
    sigma2_band: float = 0.10
    sigma2_fraction_min: float = 0.95
    slope_tolerance: float = 0.15
    oracle_factor: float = 10.0
    energy_slope_max: float = -0.7
    eta_k: int = 20
    eta_n: int = 10000
    eta_replications: int = 2000
    baseline_windows: int = 10
    stream_windows: int = 20
    fault_at: int = 10
    fault_gain: float = 2.0
    alarm_threshold: int = 2
    detect_within: int = 2
    detect_fraction_min: float = 0.95
    false_alarm_max: float = 0.05

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "n" in d and "n_list" not in d:
            n = d.pop("n")
            d["n_list"] = list(n) if isinstance(n, (list, tuple)) else [n]
        d.pop("n", None)
        if "delta" in d and not isinstance(d["delta"], (list, tuple)):
            d["delta"] = [d["delta"]]
        if "modes" in d and isinstance(d["modes"], str):
            d["modes"] = [d["modes"]]
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.study not in STUDIES:
            raise ValueError(f"study must be one of {STUDIES}")
        ns = [int(n) for n in self.n_list]
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_list must be non-empty and strictly increasing")
        if self.replications < 1 or self.chunk < 1 or self.workers < 1:
            raise ValueError("replications, chunk and workers must be positive")
        if self.study == "rate" and self.replications < 50:
            raise ValueError("rate studies need at least 50 replications")
        self.n_list = ns

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d


def _weight(cfg: ExperimentConfig):
    return make_weight(cfg.weight, cfg.alpha, cfg.beta)


def _basis(cfg: ExperimentConfig) -> OrthonormalBasis:
    top = max(cfg.n_list + ([cfg.eta_n] if cfg.study == "constant" else []))
    return build_basis(_weight(cfg), max(k_cap(top), cfg.eta_k))


def _truth(cfg: ExperimentConfig, delta: float) -> np.ndarray:
    terms = cfg.truth_terms or k_cap(min(cfg.n_list))
    model = SpectralDecayModel(delta, cfg.log_power, cfg.coeff_signs, sign_seed=cfg.seed)
    return synth_coefficients(model, terms)


def _chunks(cfg: ExperimentConfig, total: Optional[int] = None) -> list[range]:
    total = cfg.replications if total is None else total
    return [range(s, min(s + cfg.chunk, total)) for s in range(0, total, cfg.chunk)]


def _run_chunks(cfg: ExperimentConfig, work: Callable, total: Optional[int] = None) -> list:
    chunks = _chunks(cfg, total)
    with threadpool_limits(limits=1):
        if cfg.workers == 1:
            parts = [work(c) for c in chunks]
        else:
            with ThreadPoolExecutor(cfg.workers) as ex:
                parts = list(ex.map(work, chunks))
    return [rec for part in parts for rec in part]


def _analyze(r, truth: np.ndarray, sigma: float, theta: float, band: float = 0.1) -> dict:
    """Per-replication statistics for one fitted sample."""
    err = true_error(r, truth)
    conf = confidence_report(r)
    rho = tails(truth)
    g_true = float(np.dot(truth, truth))
    e_corr = ordinary_energy(r, correction_mode="corrected")
    e_paper = ordinary_energy(r, correction_mode="paper")
    m = r.m_n
    fi = fisher_interval(e_corr.value, r.n, r.sigma2_n, e_corr.k_const)
    w = EnergyWeight(theta)
    ew = weighted_energy(None, None, w, r.mode, "corrected", result=r)
    return {
        "m": m,
        "tau_star": r.tau_star,
        "sigma2": r.sigma2_n,
        "err": err,
        "bound95": conf.bound95,
        "delta_n": conf.delta_n,
        "rho_hat": conf.rho_hat,
        "rho_m": float(rho[min(m, truth.size)]),
        "covered": err <= conf.bound95,
        "g_true": g_true,
        "g_corrected": e_corr.value,
        "g_paper": e_paper.value,
        "fisher_covered": fi.root_lo <= math.sqrt(g_true) <= fi.root_hi,
        "w_true": weighted_energy_truth(truth, w),
        "w_est": ew.value,
        "w_order": ew.order_used,
        "sigma2_ok": sigma > 0 and abs(r.sigma2_n / sigma ** 2 - 1) <= band,
    }


def simulate_cell(cfg: ExperimentConfig, basis: OrthonormalBasis, n: int, truths: dict,
                  mode: str = "exact-design") -> dict:
    """Replicate every truth in ``truths`` at sample size ``n`` with shared noise."""
    grid = grid_for(basis, n)
    cap = k_cap(n)
    pn = cfg.paper_normalization
    noise = NoiseModel(cfg.law, 1.0, seed=cfg.seed)
    f = {d: signal_values(t, basis, grid.points) for d, t in truths.items()}
    riem = {d: project(f[d], basis, grid, cap, pn) for d in truths}

    def work(reps):
        eps = np.column_stack([noise.unit(replication_rng(cfg.seed, n, r), n) for r in reps])
        ce = project(eps, basis, grid, cap, pn)
        out = []
        for d, truth in truths.items():
            xi = f[d][:, None] + cfg.sigma * eps
            coeffs = riem[d][:, None] + cfg.sigma * ce
            for r in denoise_batch(xi, basis, grid, mode, pn, coeffs=coeffs):
                out.append((d, _analyze(r, truth, cfg.sigma, cfg.theta, cfg.sigma2_band)))
        return out

    recs = _run_chunks(cfg, work)
    return {d: [rec for dd, rec in recs if dd == d] for d in truths}


def _col(recs: list, key: str) -> np.ndarray:
    return np.array([r[key] for r in recs], dtype=float)


def _slope(ns, values) -> tuple[float, float]:
    x, y = np.log(np.asarray(ns, float)), np.log(np.asarray(values, float))
    if len(x) < 2 or not np.all(np.isfinite(y)):
        return math.nan, math.nan
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr) if len(x) > 2 else math.nan


def wilson(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def _verdict(criterion: str, measured, target: str, tolerance, sample_size: int, ok: bool, **extra) -> dict:
    d = {"criterion": criterion, "measured": measured, "target": target, "tolerance": tolerance,
         "sample_size": int(sample_size), "pass": bool(ok)}
    d.update(extra)
    return d


def _report(cfg: ExperimentConfig, cells: list, fits: list, verdicts: list, extra: Optional[dict] = None) -> dict:
    rep = {"schema": SCHEMA, "study": cfg.study, "config": cfg.to_dict(), "cells": cells,
           "fits": fits, "verdicts": verdicts,
           "all_pass": all(v["pass"] for v in verdicts)}
    if extra:
        rep.update(extra)
    return rep


def run_rate_study(cfg: ExperimentConfig) -> dict:
    """Error rates of the adaptive estimator and of the weighted energy."""
    basis = _basis(cfg)
    truths = {d: _truth(cfg, d) for d in cfg.delta}
    cells, fits, verdicts = [], [], []
    for mode in cfg.modes:
        per = {d: [] for d in cfg.delta}
        for n in cfg.n_list:
            res = simulate_cell(cfg, basis, n, truths, mode)
            for d, recs in res.items():
                err = _col(recs, "err")
                orc = oracle_curve(truths[d], n)
                w_err = _col(recs, "w_est") - recs[0]["w_true"]
                cell = {"mode": mode, "delta": d, "n": n, "replications": len(recs),
                        "median_err": float(np.median(err)), "mean_err": float(np.mean(err)),
                        "q10_err": float(np.quantile(err, 0.1)), "q90_err": float(np.quantile(err, 0.9)),
                        "median_m": float(np.median(_col(recs, "m"))),
                        "a_star": orc.a_star, "n0": orc.n0, "n0_over_sqrt_n": orc.ratio_7a,
                        "ratio_to_a_star": float(np.median(err)) / orc.a_star,
                        "weighted_mse": float(np.mean(w_err ** 2)),
                        "median_w_order": float(np.median(_col(recs, "w_order")))}
                cells.append(cell)
                per[d].append(cell)
                verdicts.append(_verdict(
                    f"oracle-ratio[mode={mode},delta={d},n={n}]", cell["ratio_to_a_star"],
                    f"<= {cfg.oracle_factor}", cfg.oracle_factor, len(recs),
                    cell["ratio_to_a_star"] <= cfg.oracle_factor))
        for d in cfg.delta:
            ns = [c["n"] for c in per[d]]
            slope, se = _slope(ns, [c["median_err"] for c in per[d]])
            if cfg.sigma == 0:
                target, ok = "<= -1.5", slope <= -1.5
            else:
                t = -2 * d / (2 * d + 1)
                target, ok = f"{t:.6g} +/- {cfg.slope_tolerance}", abs(slope - t) <= cfg.slope_tolerance
            fits.append({"mode": mode, "delta": d, "quantity": "median_err", "slope": slope, "slope_se": se,
                         "target": target})
            verdicts.append(_verdict(f"adaptive-rate[mode={mode},delta={d}]", slope, target,
                                     cfg.slope_tolerance, len(ns) * cfg.replications, ok))
            wslope, wse = _slope(ns, [c["weighted_mse"] for c in per[d]])
            fits.append({"mode": mode, "delta": d, "quantity": "weighted_mse", "theta": cfg.theta,
                         "slope": wslope, "slope_se": wse, "target": f"<= {cfg.energy_slope_max}"})
            if cfg.sigma > 0 and d >= cfg.theta / 2 + 0.5:
                verdicts.append(_verdict(f"weighted-energy-rate[mode={mode},delta={d},theta={cfg.theta}]",
                                         wslope, f"<= {cfg.energy_slope_max}", 0.0,
                                         len(ns) * cfg.replications, wslope <= cfg.energy_slope_max))
    return _report(cfg, cells, fits, verdicts)


def run_coverage_study(cfg: ExperimentConfig) -> dict:
    """Coverage of the 95% loss bound, Fisher interval and variance estimate."""
    basis = _basis(cfg)
    truths = {d: _truth(cfg, d) for d in cfg.delta}
    cells, verdicts = [], []
    for mode in cfg.modes:
        for n in cfg.n_list:
            res = simulate_cell(cfg, basis, n, truths, mode)
            grid = grid_for(basis, n)
            for d, recs in res.items():
                R = len(recs)
                cov = int(sum(r["covered"] for r in recs))
                fcov = int(sum(r["fisher_covered"] for r in recs))
                s2ok = int(sum(r["sigma2_ok"] for r in recs))
                g = recs[0]["g_true"]
                truth = truths[d]
                prof = noise_profile(basis, grid, truth.size, mode, cfg.paper_normalization)
                k2 = float(np.dot(prof, truth ** 2) / g)
                z = (_col(recs, "g_corrected") - g) / math.sqrt(4 * cfg.sigma ** 2 * k2 * g / n) if cfg.sigma > 0 else np.zeros(R)
                norm_p = float(stats.normaltest(z).pvalue) if cfg.sigma > 0 and R >= 20 else 1.0
                cell = {"mode": mode, "delta": d, "n": n, "replications": R,
                        "bound95_coverage": cov / R, "bound95_wilson": wilson(cov, R),
                        "fisher_coverage": fcov / R, "fisher_wilson": wilson(fcov, R),
                        "sigma2_within_band": s2ok / R,
                        "energy_z_mean": float(np.mean(z)), "energy_z_sd": float(np.std(z, ddof=1)) if R > 1 else 0.0,
                        "energy_normality_p": norm_p,
                        "mean_err": float(np.mean(_col(recs, "err"))),
                        "mean_tau_star": float(np.mean(_col(recs, "tau_star"))),
                        "median_m": float(np.median(_col(recs, "m")))}
                cells.append(cell)
                tag = f"mode={mode},delta={d},n={n}"
                verdicts.append(_verdict(f"bound95-coverage[{tag}]", cell["bound95_coverage"],
                                         f">= {cfg.bound_coverage_min}", 0.0, R,
                                         cell["bound95_coverage"] >= cfg.bound_coverage_min))
                verdicts.append(_verdict(f"fisher-coverage[{tag}]", cell["fisher_coverage"],
                                         f">= {cfg.fisher_coverage_min}", 0.0, R,
                                         cell["fisher_coverage"] >= cfg.fisher_coverage_min))
                if cfg.sigma > 0:
                    verdicts.append(_verdict(f"energy-normality[{tag}]", norm_p, f"p >= {cfg.normality_alpha}",
                                             cfg.normality_alpha, R, norm_p >= cfg.normality_alpha))
                    verdicts.append(_verdict(f"sigma2-band[{tag}]", cell["sigma2_within_band"],
                                             f">= {cfg.sigma2_fraction_min}", cfg.sigma2_band, R,
                                             cell["sigma2_within_band"] >= cfg.sigma2_fraction_min))
    return _report(cfg, cells, [], verdicts)


def run_constant_study(cfg: ExperimentConfig) -> dict:
    """Empirical ratios tau*/A* and loss/tau*, and the per-coefficient noise variance."""
    basis = _basis(cfg)
    truths = {d: _truth(cfg, d) for d in cfg.delta}
    cells, verdicts = [], []
    mode = cfg.modes[0]
    per = {d: [] for d in cfg.delta}
    for n in cfg.n_list:
        res = simulate_cell(cfg, basis, n, truths, mode)
        for d, recs in res.items():
            orc = oracle_curve(truths[d], n)
            y1 = _col(recs, "tau_star") / orc.a_star
            tau = _col(recs, "tau_star")
            y2 = _col(recs, "err") / np.where(tau > 0, tau, np.nan)
            cell = {"delta": d, "n": n, "replications": len(recs),
                    "y1_median": float(np.median(y1)), "y1_q90": float(np.quantile(y1, 0.9)),
                    "y2_median": float(np.nanmedian(y2)), "y2_q90": float(np.nanquantile(y2, 0.9)),
                    "y2_band_1_05": float(1.05 * np.nanquantile(y2, 0.9))}
            cells.append(cell)
            per[d].append(cell)
    for d in cfg.delta:
        cs = per[d]
        if len(cs) >= 2:
            a, b = cs[-2]["y2_median"], cs[-1]["y2_median"]
            change = abs(b - a) / max(abs(a), 1e-300)
            verdicts.append(_verdict(f"y2-stability[delta={d}]", change, "< 0.3", 0.3,
                                     2 * cfg.replications, math.isfinite(change) and change < 0.3))
        y1s = [c["y1_median"] for c in cs]
        spread = max(y1s) / min(y1s) if min(y1s) > 0 else math.inf
        verdicts.append(_verdict(f"tau-over-astar-bounded[delta={d}]", spread, "max/min across n <= 3", 3.0,
                                 len(cs) * cfg.replications, spread <= 3.0))
    eta = eta_variance_study(cfg, basis, cfg.eta_n, cfg.eta_k)
    best = eta["closest"]
    verdicts.append(_verdict(f"eta-variance-convention[k={cfg.eta_k},n={cfg.eta_n}]",
                             eta["empirical"], "grid_corrected within 10%", 0.1, cfg.eta_replications,
                             abs(eta["empirical"] / eta["candidates"]["grid_corrected"] - 1) <= 0.1,
                             closest=best))
    return _report(cfg, cells, [], verdicts, {"eta_variance": eta})


def eta_variance_study(cfg: ExperimentConfig, basis: OrthonormalBasis, n: int, k: int) -> dict:
    """Variance of ``sqrt(n) c(k, n) / sigma`` under pure noise (1/n sums)."""
    grid = grid_for(basis, n)
    noise = NoiseModel(cfg.law, 1.0, seed=cfg.seed)

    def work(reps):
        eps = np.column_stack([noise.unit(replication_rng(cfg.seed, n, r, 1), n) for r in reps])
        return list(project(eps, basis, grid, k, paper_normalization=True)[k - 1] * math.sqrt(n))

    vals = np.array(_run_chunks(cfg, work, cfg.eta_replications))
    emp = float(np.var(vals, ddof=1))
    kg = basis.constants.k_gamma
    integral = gamma_quadrature(basis, lambda x: basis(x, k)[..., k - 1] ** 2 * basis.weight(x))
    cands = {"two_pi_k_gamma": 2 * math.pi * kg, "pi_k_gamma": math.pi * kg,
             "integral_phi2_gamma2": integral, "grid_corrected": integral / grid.length}
    closest = min(cands, key=lambda c: abs(cands[c] - emp))
    return {"k": k, "n": n, "empirical": emp, "candidates": cands, "closest": closest}


def run_detector_study(cfg: ExperimentConfig) -> dict:
    """Detection latency after an amplitude fault, and stationary false alarms."""
    basis = _basis(cfg)
    n = cfg.n_list[0]
    grid = grid_for(basis, n)
    cap = k_cap(n)
    truth = _truth(cfg, cfg.delta[0])
    f = signal_values(truth, basis, grid.points)
    riem = project(f, basis, grid, cap)
    noise = NoiseModel(cfg.law, 1.0, seed=cfg.seed)
    nb, ns = cfg.baseline_windows, cfg.stream_windows
    mode = cfg.modes[0]

    def work(streams):
        out = []
        for s in streams:
            total = nb + 2 * ns
            eps = np.column_stack([noise.unit(replication_rng(cfg.seed, n, s, w), n) for w in range(total)])
            gain = np.ones(total)
            gain[nb + ns + cfg.fault_at:] = cfg.fault_gain
            xi = f[:, None] * gain + cfg.sigma * eps
            coeffs = riem[:, None] * gain + cfg.sigma * project(eps, basis, grid, cap)
            est = window_energies(xi, basis, grid, cfg.theta, mode, coeffs=coeffs)
            region = baseline_from_energies(est[:nb], n, cfg.theta)
            energies = [e.value for e, _ in est[nb:]]
            stationary = verdicts_from_energies(energies[:ns], region, cfg.alarm_threshold)
            faulty = verdicts_from_energies(energies[ns:], region, cfg.alarm_threshold)
            pre = first_alarm(faulty[:cfg.fault_at])
            post = first_alarm(faulty[cfg.fault_at:])
            out.append({"false_alarm": first_alarm(stationary) is not None,
                        "pre_fault_alarm": pre is not None,
                        "latency": None if post is None else post - cfg.fault_at + 1,
                        "radius": region.radius, "center": region.center})
        return out

    recs = _run_chunks(cfg, work)
    R = len(recs)
    detected = sum(1 for r in recs if r["latency"] is not None and r["latency"] <= cfg.detect_within)
    false = sum(1 for r in recs if r["false_alarm"])
    cell = {"n": n, "streams": R, "detected_fraction": detected / R, "detected_wilson": wilson(detected, R),
            "false_alarm_rate": false / R, "false_alarm_wilson": wilson(false, R),
            "median_radius": float(np.median([r["radius"] for r in recs])),
            "median_center": float(np.median([r["center"] for r in recs])),
            "root_energy_truth": math.sqrt(float(np.dot(truth, truth)))}
    verdicts = [
        _verdict(f"fault-detection[n={n}]", cell["detected_fraction"], f">= {cfg.detect_fraction_min}",
                 0.0, R, cell["detected_fraction"] >= cfg.detect_fraction_min,
                 within_windows=cfg.detect_within),
        _verdict(f"false-alarm[n={n}]", cell["false_alarm_rate"], f"<= {cfg.false_alarm_max}", 0.0, R,
                 cell["false_alarm_rate"] <= cfg.false_alarm_max, stream_windows=ns),
    ]
    return _report(cfg, [cell], [], verdicts)


def run_study(cfg: ExperimentConfig) -> dict:
    return {"rate": run_rate_study, "coverage": run_coverage_study,
            "constant": run_constant_study, "detector": run_detector_study}[cfg.study](cfg)
