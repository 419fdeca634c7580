"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adaptive import denoise, eval_estimate
from .basis import BasisConstructionError, build_basis, gram_matrix, sup_norms
from .coefficients import k_cap
from .design import NoiseModel, SpectralDecayModel, make_grid, sample_signal, synth_coefficients
from .detector import build_baseline, monitor
from .energy import CORRECTION_MODES, EnergyWeight, ordinary_energy, weighted_energy
from .harness import ExperimentConfig, run_study
from .io import SCHEMA, parse_signal_csv, parse_stream_csv, write_csv, write_json
from .uncertainty import confidence_report
from .weights import make_weight

log = logging.getLogger("orthoseries")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=-0.25)
    p.add_argument("--beta", type=float, default=-0.25)
    p.add_argument("--weight", choices=["jacobi", "beta01"], default="jacobi")
    p.add_argument("--mode", choices=["exact-design", "paper"], default="exact-design")
    p.add_argument("--paper-normalization", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orthoseries",
                     description="Adaptive orthogonal-series denoising, energy estimation and distortion monitoring.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("denoise", help="adaptive projection estimate of a sampled signal")
    p.add_argument("input", type=Path)
    _common(p)

    p = sub.add_parser("energy", help="ordinary or weighted energy with a confidence interval")
    p.add_argument("input", type=Path)
    _common(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--correction-mode", choices=CORRECTION_MODES, default="corrected")

    p = sub.add_parser("monitor", help="flag windows whose energy leaves a baseline region")
    p.add_argument("baseline", type=Path, help="directory of baseline window CSVs")
    p.add_argument("stream", type=Path, help="CSV of concatenated windows")
    _common(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--window-length", type=int, default=None)
    p.add_argument("--alarm-threshold", type=int, default=2)

    p = sub.add_parser("simulate", help="synthetic signals or a Monte Carlo study from a JSON config")
    p.add_argument("config", type=Path)
    p.add_argument("--output", type=Path, default=Path("."))
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("basis", help="recurrence table and orthonormality report")
    _common(p)
    p.add_argument("--max-degree", type=int, default=30)
    p.add_argument("--grid-n", type=int, default=1001)
    return parser


def _resolved(args, **extra) -> dict:
    cfg = {"command": args.command, "version": __version__}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "verbose"):
            continue
        cfg[k] = str(v) if isinstance(v, Path) else v
    cfg.update(extra)
    return cfg


def _weight(args):
    return make_weight(args.weight, args.alpha, args.beta)


def _signal_basis(args, n: int):
    return build_basis(_weight(args), max(k_cap(n), 2))


def cmd_denoise(args) -> int:
    w = _weight(args)
    s = parse_signal_csv(args.input, w.domain)
    basis = _signal_basis(args, s.n)
    r = denoise(s, basis, args.mode, args.paper_normalization)
    conf = confidence_report(r)
    fitted = eval_estimate(r, basis, s.grid.points)
    args.output.mkdir(parents=True, exist_ok=True)
    stem = args.input.stem
    write_json(args.output / f"{stem}.denoise.json", {
        "schema": SCHEMA,
        "config": _resolved(args, weight_detail=w.describe(), n=s.n),
        "m_n": r.m_n,
        "tau_star": r.tau_star,
        "sigma2_n": r.sigma2_n,
        "coefficients": r.coeffs.values,
        "confidence": {"delta_n": conf.delta_n, "bound95": conf.bound95, "rho_hat": conf.rho_hat,
                       "quantile_factor": conf.quantile_factor},
    })
    write_csv(args.output / f"{stem}.reconstruction.csv", ["x", "xi", "f_hat"],
              zip(s.grid.points, s.xi, fitted))
    write_csv(args.output / f"{stem}.coefficients.csv", ["k", "value", "kind"],
              [(k + 1, float(v), "empirical") for k, v in enumerate(r.all_coeffs.values)])
    log.info("M(n)=%d tau*=%.3g sigma2=%.3g", r.m_n, r.tau_star, r.sigma2_n)
    return 0


def cmd_energy(args) -> int:
    w = _weight(args)
    s = parse_signal_csv(args.input, w.domain)
    basis = _signal_basis(args, s.n)
    r = denoise(s, basis, args.mode, args.paper_normalization)
    if args.theta == 0:
        e = ordinary_energy(r, basis, args.correction_mode)
    else:
        e = weighted_energy(s, basis, EnergyWeight(args.theta), args.mode, args.correction_mode,
                            args.paper_normalization, result=r)
    args.output.mkdir(parents=True, exist_ok=True)
    write_json(args.output / f"{args.input.stem}.energy.json", {
        "schema": SCHEMA,
        "config": _resolved(args, weight_detail=w.describe(), n=s.n),
        "value": e.value,
        "variance": e.variance,
        "ci95": list(e.ci95),
        "order_used": e.order_used,
        "mode": args.mode,
        "kind": e.kind,
        "correction_mode": e.correction_mode,
        "negative": e.negative,
        "sigma2_n": r.sigma2_n,
    })
    return 0


def cmd_monitor(args) -> int:
    w = _weight(args)
    files = sorted(args.baseline.glob("*.csv")) if args.baseline.is_dir() else []
    if not files:
        raise UsageError(f"no baseline CSV files in {args.baseline}")
    windows = [parse_signal_csv(f, w.domain) for f in files]
    n = args.window_length or windows[0].n
    for f, win in zip(files, windows):
        if win.n != n:
            raise UsageError(f"baseline window {f} has length {win.n}, expected {n}")
    stream = parse_stream_csv(args.stream, n, w.domain)
    basis = _signal_basis(args, n)
    region = build_baseline(windows, basis, args.theta, args.mode)
    verdicts = monitor(stream, region, basis, args.alarm_threshold, args.mode)
    args.output.mkdir(parents=True, exist_ok=True)
    stem = args.stream.stem
    write_csv(args.output / f"{stem}.verdicts.csv", ["window", "energy", "inside", "alarm"],
              [(v.window_index, v.energy, int(v.inside), int(v.alarm)) for v in verdicts])
    first = next((v.window_index for v in verdicts if v.alarm), None)
    write_json(args.output / f"{stem}.monitor.json", {
        "schema": SCHEMA,
        "config": _resolved(args, window_length=n, baseline_files=[f.name for f in files]),
        "baseline": {"center": region.center, "radius": region.radius, "built_from": region.built_from,
                     "spread": region.spread},
        "first_alarm": first,
        "windows": len(verdicts),
    })
    return 0


def _simulate_signals(cfg: dict, out: Path) -> dict:
    known = {"n", "alpha", "beta", "weight", "delta", "sigma", "law", "replications", "seed",
             "log_power", "coeff_signs", "terms", "q"}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown config fields: {sorted(unknown)}")
    n = int(cfg["n"])
    resolved = {"n": n, "alpha": float(cfg.get("alpha", -0.25)), "beta": float(cfg.get("beta", -0.25)),
                "weight": cfg.get("weight", "jacobi"), "delta": float(cfg.get("delta", 1.0)),
                "sigma": float(cfg.get("sigma", 0.2)), "law": cfg.get("law", "gaussian"),
                "q": float(cfg.get("q", 2.0)), "replications": int(cfg.get("replications", 1)),
                "seed": int(cfg.get("seed", 0)), "log_power": float(cfg.get("log_power", 0.0)),
                "coeff_signs": cfg.get("coeff_signs", "random"), "terms": int(cfg.get("terms", k_cap(n)))}
    if resolved["replications"] < 1:
        raise UsageError("replications must be positive")
    w = make_weight(resolved["weight"], resolved["alpha"], resolved["beta"])
    basis = build_basis(w, max(resolved["terms"], 2))
    model = SpectralDecayModel(resolved["delta"], resolved["log_power"], resolved["coeff_signs"],
                               sign_seed=resolved["seed"])
    truth = synth_coefficients(model, resolved["terms"])
    noise = NoiseModel(resolved["law"], resolved["sigma"], q=resolved["q"], seed=resolved["seed"])
    grid = make_grid(n, w.domain)
    files = []
    for r in range(resolved["replications"]):
        s = sample_signal(truth, basis, grid, noise, r)
        name = f"signal_{r:04d}.csv"
        write_csv(out / name, ["x", "xi"], zip(s.grid.points, s.xi))
        files.append(name)
    write_csv(out / "truth_coefficients.csv", ["k", "value", "kind"],
              [(k + 1, float(v), "exact") for k, v in enumerate(truth)])
    return {"schema": SCHEMA, "config": resolved, "noise": {"law": noise.law, "q": noise.q, "Q": noise.Q},
            "files": files}


def _write_tables(rep: dict, out: Path) -> None:
    for key in ("cells", "fits", "verdicts"):
        rows = rep.get(key) or []
        if not rows:
            continue
        header = list(dict.fromkeys(k for row in rows for k in row))
        write_csv(out / f"{key}.csv", header,
                  [[_cell(row.get(h)) for h in header] for row in rows])


def _cell(v):
    if isinstance(v, (list, tuple)):
        return ";".join(format(float(x), ".17g") for x in v)
    if isinstance(v, bool):
        return int(v)
    return "" if v is None else v


def cmd_simulate(args) -> int:
    try:
        cfg = json.loads(args.config.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"{args.config}: expected a JSON object")
    if args.seed is not None:
        cfg["seed"] = args.seed
    args.output.mkdir(parents=True, exist_ok=True)
    if "study" in cfg or "n_list" in cfg:
        ecfg = ExperimentConfig.from_dict(cfg)
        ecfg.workers = args.workers
        rep = run_study(ecfg)
        write_json(args.output / "report.json", rep)
        _write_tables(rep, args.output)
        log.info("%s study: %s", ecfg.study, "all pass" if rep["all_pass"] else "some verdicts fail")
    elif "n" in cfg:
        write_json(args.output / "manifest.json", _simulate_signals(cfg, args.output))
    else:
        raise UsageError("config needs either 'n' (signals) or 'study'/'n_list' (experiment)")
    return 0


def cmd_basis(args) -> int:
    w = _weight(args)
    basis = build_basis(w, max(args.max_degree, 2))
    k = args.max_degree
    grid = make_grid(max(args.grid_n, 15), w.domain).points
    sup = sup_norms(basis, grid, k)
    kv = min(k, 31)
    gram = gram_matrix(basis, kv, max(2 * kv + 17, 97))
    row_err = np.max(np.abs(gram - np.eye(kv)), axis=1)
    tr = basis.triples
    rows = []
    for j in range(k):
        A, B, C = tr[j] if j < tr.shape[0] else (np.nan, np.nan, np.nan)
        rows.append((j, float(basis.a[j]), float(basis.b[j]), float(A), float(B), float(C), float(sup[j]),
                     float(row_err[j]) if j < kv else ""))
    args.output.mkdir(parents=True, exist_ok=True)
    stem = f"basis_{args.weight}_{args.alpha:g}_{args.beta:g}"
    write_csv(args.output / f"{stem}.csv",
              ["degree", "a", "b", "A", "B", "C", "sup_norm", "ortho_error"], rows)
    c = basis.constants
    write_json(args.output / f"{stem}.json", {
        "schema": SCHEMA,
        "config": _resolved(args, weight_detail=w.describe()),
        "constants": {"k_gamma": c.k_gamma, "mass": c.mass, "c0": c.c0, "c1": c.c1, "lambda": c.lam},
        "ortho_error": basis.ortho_error,
    })
    return 0


COMMANDS = {"denoise": cmd_denoise, "energy": cmd_energy, "monitor": cmd_monitor,
            "simulate": cmd_simulate, "basis": cmd_basis}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"orthoseries: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (BasisConstructionError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"orthoseries: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"orthoseries: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
