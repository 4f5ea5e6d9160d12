"""Asymptotic statistical efficiency of noise-contrastive estimation
as a function of the noise distribution and the noise-data ratio."""

from ._kernels import BACKEND
from .models import ModelKind, ScalarModel, parse_model, format_model
from .densities import (
    HistogramDensity,
    ParametricNoise,
    TabulatedDensity,
    histogram_from_weights,
    uniform_histogram,
)
from .quadrature import Grid, build_grid, default_grid_for
from .asymptotics import (
    EfficiencyReport,
    WeightedScoreMoments,
    asymptotic_covariance,
    asymptotic_kl,
    asymptotic_mse,
    cramer_rao_mse,
    discriminator_weight,
    efficiency_report,
    generalized_moments,
    mse_gaps_all_noise,
)
from .theory import (
    TheoreticalNoise,
    dirac_candidates,
    optimal_noise_all_data,
    optimal_noise_all_noise,
)
from .optimize import (
    OptimizerTrace,
    SweepResult,
    mse_gradient_logits,
    optimize_histogram,
    optimize_proportion,
    sweep_parametric_noise,
)
from .simulate import EmpiricalReport, NceRun, empirical_kl, empirical_mse, nce_fit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ModelKind",
    "ScalarModel",
    "parse_model",
    "format_model",
    "HistogramDensity",
    "ParametricNoise",
    "TabulatedDensity",
    "histogram_from_weights",
    "uniform_histogram",
    "Grid",
    "build_grid",
    "default_grid_for",
    "EfficiencyReport",
    "WeightedScoreMoments",
    "asymptotic_covariance",
    "asymptotic_kl",
    "asymptotic_mse",
    "cramer_rao_mse",
    "discriminator_weight",
    "efficiency_report",
    "generalized_moments",
    "mse_gaps_all_noise",
    "TheoreticalNoise",
    "dirac_candidates",
    "optimal_noise_all_data",
    "optimal_noise_all_noise",
    "OptimizerTrace",
    "SweepResult",
    "mse_gradient_logits",
    "optimize_histogram",
    "optimize_proportion",
    "sweep_parametric_noise",
    "EmpiricalReport",
    "NceRun",
    "empirical_kl",
    "empirical_mse",
    "nce_fit",
]
