"""Simultaneous nonparametric inference for partial areas under ROC curves."""

from pauc.contrasts import ContrastMatrix, custom, dunnett, interaction, tukey
from pauc.covariance import CovarianceEstimate, estimate_covariance
from pauc.empdist import PairedSample, Sample, ecdf_eval, joint_ecdf_eval, quantile
from pauc.estimator import (
    TOTAL_AUC,
    DiagnosticSample,
    MarginalSpec,
    PaucEstimate,
    TrimSpec,
    estimate_pauc,
    estimate_pauc_trimmed_mw,
    true_pauc,
)
from pauc.inference import (
    MctResult,
    RngStream,
    bootstrap_max_statistics,
    bootstrap_resample,
    equicoordinate_quantile,
    holm_adjust,
    run_mct,
    test_statistic,
)

__version__ = "0.1.0"

__all__ = [
    "ContrastMatrix",
    "CovarianceEstimate",
    "DiagnosticSample",
    "MarginalSpec",
    "MctResult",
    "PairedSample",
    "PaucEstimate",
    "RngStream",
    "Sample",
    "TOTAL_AUC",
    "TrimSpec",
    "bootstrap_max_statistics",
    "bootstrap_resample",
    "custom",
    "dunnett",
    "ecdf_eval",
    "equicoordinate_quantile",
    "estimate_covariance",
    "estimate_pauc",
    "estimate_pauc_trimmed_mw",
    "holm_adjust",
    "interaction",
    "joint_ecdf_eval",
    "quantile",
    "run_mct",
    "test_statistic",
    "true_pauc",
    "tukey",
]
