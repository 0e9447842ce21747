"""Distributed fingerprint localization for cell-free massive MIMO.

Per-AP Gaussian process regressors map (RSS, azimuth) fingerprints to
position coordinates; the UE fuses the resulting Gaussians. The package
bundles the channel simulator, the estimators, baseline localizers, the
uncertainty metrics and a Monte Carlo experiment harness.
"""

from ._validation import ConfigurationError
from .config import ScenarioConfig, config_from_dict, load_config_file
from .geometry import Scenario, generate_scenario, nominal_aoa_deg, pathloss_db, wrap_angle_deg
from .shadowing import ShadowField, ShadowModel, sample_shadow_field, shadow_covariance
from .channel import (ChannelStats, channel_stats, disk_covariance,
                      sample_received_signal, steering_vector)
from .bessel import bessel_j
from .fingerprint import (FingerprintDB, MusicAoaEstimator, TestObservation,
                          estimate_rss_db, music_aoa_deg, offline_aoa_deg)
from .gpr import (CoordinateGP, Hyperparams, PositionEstimate, TrainConfig,
                  TrainingError, grad_log_marginal_likelihood, kernel,
                  log_marginal_likelihood)
from .fusion import FusionResult, fuse_bayesian, fuse_mean, fuse_median, fuse_zscore
from .baselines import (CentralFingerprintDB, GprLocalizer, KnnPositionRegressor,
                        LinearPositionRegressor, build_central_db,
                        distributed_median_with, fit_centralized_gpr,
                        knn_predict, lr_fit_predict)
from .metrics import (TrialRecord, ellipse_area, ellipse_covers,
                      localization_error, read_trials_csv, write_trials_csv)
from .crb import (CrbConfig, crb_aoa_variance, crb_aoa_variance_deg2,
                  crb_noised_aoa, disk_covariance_derivative)
from .harness import ExperimentSpec, run_experiment, spec_from_dict, summarize

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ScenarioConfig", "config_from_dict", "load_config_file",
    "Scenario", "generate_scenario", "nominal_aoa_deg", "pathloss_db", "wrap_angle_deg",
    "ShadowField", "ShadowModel", "sample_shadow_field", "shadow_covariance",
    "ChannelStats", "channel_stats", "disk_covariance", "sample_received_signal",
    "steering_vector", "bessel_j",
    "FingerprintDB", "MusicAoaEstimator", "TestObservation", "estimate_rss_db",
    "music_aoa_deg", "offline_aoa_deg",
    "CoordinateGP", "Hyperparams", "PositionEstimate", "TrainConfig", "TrainingError",
    "grad_log_marginal_likelihood", "kernel", "log_marginal_likelihood",
    "FusionResult", "fuse_bayesian", "fuse_mean", "fuse_median", "fuse_zscore",
    "CentralFingerprintDB", "GprLocalizer", "KnnPositionRegressor",
    "LinearPositionRegressor", "build_central_db", "distributed_median_with",
    "fit_centralized_gpr", "knn_predict", "lr_fit_predict",
    "TrialRecord", "ellipse_area", "ellipse_covers", "localization_error",
    "read_trials_csv", "write_trials_csv",
    "CrbConfig", "crb_aoa_variance", "crb_aoa_variance_deg2", "crb_noised_aoa",
    "disk_covariance_derivative",
    "ExperimentSpec", "run_experiment", "spec_from_dict", "summarize",
]
