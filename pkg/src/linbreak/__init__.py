"""Retrospective change-point detection in multivariate linear models ``Y = Pi X + nu``."""

from .baseline import OlsFit, WaldResult, ols_fit, sup_wald
from .bounds import (KlPair, kl_gaussian_regression, kl_gaussian_stochastic, kl_gaussian_trend,
                     lower_bound, theorem1_exponent, theorem2_exponent)
from .calibrate import (LimitLawSpec, PerLengthThreshold, ThresholdEstimate, analytic_threshold,
                        back_solve_lambda, limit_corr_matrix, limit_threshold, mc_quantiles,
                        mc_threshold)
from .cpstat import StatProfile, norm_path, profile, search_window, z_statistic
from .detect import DetectionConfig, DetectionResult, detect_multiple, detect_single
from .harness import ExperimentConfig, ExperimentReport, reproduce_table, run_experiment
from .model import (AR1Plan, DeterministicPlan, LaggedSystemPlan, ModelSpec, NoiseModel,
                    PiecewiseCoefficients, Sample, ses_to_reduced, simulate, simulate_batch)

__all__ = [
    "AR1Plan", "DetectionConfig", "DetectionResult", "DeterministicPlan", "ExperimentConfig",
    "ExperimentReport", "KlPair", "LaggedSystemPlan", "LimitLawSpec", "ModelSpec", "NoiseModel",
    "OlsFit", "PerLengthThreshold", "PiecewiseCoefficients", "Sample", "StatProfile",
    "ThresholdEstimate", "WaldResult", "analytic_threshold", "back_solve_lambda",
    "detect_multiple", "detect_single", "kl_gaussian_regression", "kl_gaussian_stochastic",
    "kl_gaussian_trend", "limit_corr_matrix", "limit_threshold", "lower_bound", "mc_quantiles",
    "mc_threshold", "norm_path", "ols_fit", "profile", "reproduce_table", "run_experiment",
    "search_window", "ses_to_reduced", "simulate", "simulate_batch", "sup_wald",
    "theorem1_exponent", "theorem2_exponent", "z_statistic",
]
