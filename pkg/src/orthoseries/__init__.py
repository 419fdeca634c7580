"""Adaptive orthogonal-series denoising on weighted polynomial systems."""

from .adaptive import DenoiseResult, denoise, denoise_batch, oracle_curve, select_order, tau, tau_curve
from .basis import BasisConstructionError, OrthonormalBasis, build_basis, eval_basis, sup_norms
from .coefficients import CoefficientSet, empirical_coefficients, exact_coefficients, k_cap, noise_profile
from .design import (DesignGrid, NoiseModel, SampledSignal, SpectralDecayModel, make_grid, sample_signal,
                     synth_coefficients, tail_ratio_check)
from .detector import BaselineRegion, DetectionVerdict, build_baseline, monitor
from .energy import EnergyEstimate, EnergyWeight, fisher_interval, ordinary_energy, weighted_energy
from .harness import ExperimentConfig, run_study
from .io import SignalFileError, parse_signal_csv
from .uncertainty import ConfidenceReport, confidence_report, true_error
from .weights import (DomainError, InadmissibleWeight, WeightConstants, WeightFunction, make_weight,
                      weight_constants)

__version__ = "0.1.0"

__all__ = [
    "BaselineRegion",
    "BasisConstructionError",
    "CoefficientSet",
    "ConfidenceReport",
    "DenoiseResult",
    "DesignGrid",
    "DetectionVerdict",
    "DomainError",
    "EnergyEstimate",
    "EnergyWeight",
    "ExperimentConfig",
    "InadmissibleWeight",
    "NoiseModel",
    "OrthonormalBasis",
    "SampledSignal",
    "SignalFileError",
    "SpectralDecayModel",
    "WeightConstants",
    "WeightFunction",
    "build_baseline",
    "build_basis",
    "confidence_report",
    "denoise",
    "denoise_batch",
    "empirical_coefficients",
    "eval_basis",
    "exact_coefficients",
    "fisher_interval",
    "k_cap",
    "make_grid",
    "make_weight",
    "monitor",
    "noise_profile",
    "oracle_curve",
    "ordinary_energy",
    "parse_signal_csv",
    "run_study",
    "sample_signal",
    "select_order",
    "sup_norms",
    "synth_coefficients",
    "tail_ratio_check",
    "tau",
    "tau_curve",
    "true_error",
    "weight_constants",
    "weighted_energy",
]
