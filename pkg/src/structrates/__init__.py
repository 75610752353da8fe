"""Plug-in decoding, weight estimators, and rate experiments for finite
structured prediction.

The package follows one estimation pattern: regress the conditional mean
of a one-hot observation embedding with linear-in-the-labels weights
(k-nearest-neighbor or kernel ridge), then decode by minimizing a linear
surrogate risk over the finite prediction set.  Margin geometry around the
decision frontier drives the attainable convergence rates; the diagnostics
and synthetic problems here measure both sides of that story.
"""

from .diagnostics import (
    AlphaFit,
    MarginProfile,
    ProfileDegenerate,
    check_no_density,
    default_thresholds,
    fit_alpha,
    margin_profile,
    save_profile_csv,
    save_profile_json,
)
from .estimators import (
    KernelSpec,
    KrrFactorization,
    SampleSet,
    knn_schedule,
    knn_weights,
    knn_weights_batch,
    krr_fit,
    krr_schedule,
    krr_weights,
    load_dataset_csv,
    predict_surrogate,
    save_dataset_csv,
)
from .harness import (
    ExponentialRegime,
    KnnSpec,
    KrrSpec,
    RateExperimentConfig,
    RateReport,
    fit_slope,
    rate_experiment,
    run_trial,
    write_report_json,
    write_summary_csv,
    write_trials_csv,
)
from .losses import (
    ContractViolation,
    FiniteLoss,
    binary_decode,
    binary_frontier_distance,
    decode,
    frontier_distance,
    frontier_distances,
    load_loss,
    load_loss_csv,
    load_loss_json,
    margin_gap,
    risk_vector,
    sandwich_constants,
    save_loss_csv,
    save_loss_json,
    three_class_loss,
    zero_one_loss,
)
from .synthetic import (
    PROBLEM_KINDS,
    PowerMargin,
    SeparatedSupport,
    Staircase,
    SyntheticProblem,
    ThreeClassSimplex,
    make_problem,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaFit",
    "ContractViolation",
    "ExponentialRegime",
    "FiniteLoss",
    "KernelSpec",
    "KnnSpec",
    "KrrFactorization",
    "KrrSpec",
    "MarginProfile",
    "PROBLEM_KINDS",
    "PowerMargin",
    "ProfileDegenerate",
    "RateExperimentConfig",
    "RateReport",
    "SampleSet",
    "SeparatedSupport",
    "Staircase",
    "SyntheticProblem",
    "ThreeClassSimplex",
    "binary_decode",
    "binary_frontier_distance",
    "check_no_density",
    "decode",
    "default_thresholds",
    "fit_alpha",
    "fit_slope",
    "frontier_distance",
    "frontier_distances",
    "knn_schedule",
    "knn_weights",
    "knn_weights_batch",
    "krr_fit",
    "krr_schedule",
    "krr_weights",
    "load_dataset_csv",
    "load_loss",
    "load_loss_csv",
    "load_loss_json",
    "make_problem",
    "margin_gap",
    "margin_profile",
    "predict_surrogate",
    "rate_experiment",
    "risk_vector",
    "run_trial",
    "sandwich_constants",
    "save_dataset_csv",
    "save_loss_csv",
    "save_loss_json",
    "save_profile_csv",
    "save_profile_json",
    "three_class_loss",
    "write_report_json",
    "write_summary_csv",
    "write_trials_csv",
    "zero_one_loss",
]
