"""Monte-Carlo convergence-rate experiments over the synthetic problems."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import math

import numpy as np

from .estimators import (
    KernelSpec,
    knn_schedule,
    knn_weights_batch,
    krr_fit,
    krr_schedule,
    krr_weights,
    predict_surrogate,
)
from .losses import ContractViolation
from .synthetic import SyntheticProblem

DEFAULT_N_GRID = (10, 32, 100, 316, 1000, 3162, 10000, 31623, 100000)


class ExponentialRegime(Exception):
    """Risk collapsed to zero on too much of the fit window; no slope exists."""


@dataclass(frozen=True)
class KnnSpec:
    """k-NN estimator: scheduled k_n = floor(k0 n^(2b/(2b+1))) or a fixed k."""

    k0: float = 1.0
    beta: float = 1.0
    fixed_k: int | None = None
    kind = "knn"

    def __post_init__(self):
        if self.fixed_k is None:
            if not (self.k0 > 0) or not (self.beta > 0):
                raise ContractViolation("need k0 > 0 and beta > 0")
        elif self.fixed_k < 1:
            raise ContractViolation("fixed_k must be >= 1")

    def neighbor_count(self, n: int) -> int:
        if self.fixed_k is not None:
            return self.fixed_k
        return knn_schedule(n, self.k0, self.beta)

    def theoretical_slope(self, alpha: float):
        if not math.isfinite(alpha):
            return None
        return -self.beta * (alpha + 1.0) / (2.0 * self.beta + 1.0)


@dataclass(frozen=True)
class KrrSpec:
    """KRR estimator: scheduled lambda_n = lambda0 n^(-1/(2q+sigma)) or fixed.

    q, sigma, p are the source, capacity, and interpolation exponents; they
    are user-supplied problem knowledge, not estimated.  p enters only the
    theoretical slope.
    """

    kernel: KernelSpec = field(default_factory=KernelSpec)
    lambda0: float = 1.0
    q: float = 0.5
    sigma: float = 1.0
    p: float = 0.0
    fixed_lambda: float | None = None
    kind = "krr"

    def __post_init__(self):
        if self.fixed_lambda is None:
            if not (self.lambda0 > 0) or not (2.0 * self.q + self.sigma > 0):
                raise ContractViolation("need lambda0 > 0 and 2q + sigma > 0")
        elif not (self.fixed_lambda > 0):
            raise ContractViolation("fixed_lambda must be positive")

    def regularizer(self, n: int) -> float:
        if self.fixed_lambda is not None:
            return self.fixed_lambda
        return krr_schedule(n, self.lambda0, self.q, self.sigma)

    def theoretical_slope(self, alpha: float):
        if not math.isfinite(alpha):
            return None
        return -(self.q - self.p) * (1.0 + alpha) / (2.0 * self.q + self.sigma)


@dataclass(frozen=True)
class RateExperimentConfig:
    problem: SyntheticProblem = None
    estimator: object = None
    n_grid: tuple = DEFAULT_N_GRID
    trials: int = 100
    eval_grid_size: int = 100
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.problem is None or self.estimator is None:
            raise ContractViolation("config needs a problem and an estimator")
        if len(self.n_grid) < 1 or self.n_grid[0] < 1:
            raise ContractViolation("n_grid must hold positive sample sizes")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ContractViolation("n_grid must be strictly increasing")
        if self.trials < 1:
            raise ContractViolation("need at least one trial")
        if self.eval_grid_size < 1:
            raise ContractViolation("evaluation grid must be nonempty")
        if self.workers < 1:
            raise ContractViolation("workers must be >= 1")


@dataclass(frozen=True)
class RateReport:
    n_grid: tuple
    risks: np.ndarray = field(repr=False)  # (len(n_grid), trials)
    mean: np.ndarray
    stderr: np.ndarray
    zero_count: np.ndarray
    fitted_slope: float | None
    fitted_coeff: float | None
    theoretical_slope: float | None
    regime_note: str


def run_trial(problem: SyntheticProblem, estimator, n: int, eval_grid_size: int,
              seed) -> float:
    """One sampled dataset, one fit, excess risk on the evaluation grid."""
    data = problem.sample(n, seed)
    grid = problem.eval_grid(eval_grid_size)
    queries = grid[:, None]
    loss = problem.loss
    if estimator.kind == "knn":
        weights = knn_weights_batch(queries, data, estimator.neighbor_count(n))
    elif estimator.kind == "krr":
        lam = estimator.regularizer(n)
        fact = krr_fit(data, estimator.kernel, lam)
        weights = krr_weights(queries, fact, data, estimator.kernel)
    else:
        raise ContractViolation(f"unknown estimator kind {estimator.kind!r}")
    measures = predict_surrogate(weights, data, loss)
    idx = np.argmin(measures @ loss.matrix.T, axis=1)
    predictions = np.array(loss.z_labels)[idx]
    return problem.excess_risk(predictions, grid)


def _trial_task(args) -> float:
    problem, estimator, n, eval_grid_size, master_seed, n_index, trial_index = args
    seed = np.random.SeedSequence(entropy=master_seed, spawn_key=(n_index, trial_index))
    return run_trial(problem, estimator, n, eval_grid_size, seed)


def fit_slope(n_values, risks, window=None) -> float:
    """Least-squares slope of log(risk) against log(n).

    window selects the fit points: None/"top-decade" keeps n >= max(n)/10,
    a (lo, hi) pair keeps lo <= n <= hi.  Zero-risk points are excluded;
    fewer than 3 surviving points raises ExponentialRegime.
    """
    slope, _, _ = _fit_loglog(n_values, risks, window)
    return slope


def _fit_loglog(n_values, risks, window=None):
    n_arr = np.asarray(n_values, dtype=float)
    r_arr = np.asarray(risks, dtype=float)
    if n_arr.shape != r_arr.shape or n_arr.ndim != 1:
        raise ContractViolation("need matching 1-d n values and risks")
    if window is None or window == "top-decade":
        selected = n_arr >= n_arr.max() / 10.0
    else:
        lo, hi = window
        selected = (n_arr >= lo) & (n_arr <= hi)
    usable = selected & (r_arr > 0)
    if usable.sum() < 3:
        raise ExponentialRegime(
            f"only {int(usable.sum())} positive risk points in the fit window; "
            "risk collapsed to zero (or the window is too narrow)"
        )
    slope, intercept = np.polyfit(np.log(n_arr[usable]), np.log(r_arr[usable]), 1)
    return float(slope), float(intercept), usable


def rate_experiment(config: RateExperimentConfig) -> RateReport:
    """Run trials per n, aggregate excess risks, and fit the empirical rate.

    Per-trial randomness is keyed by (master_seed, n_index, trial_index),
    so reports are bit-identical for a fixed config regardless of worker
    count or completion order.  Any failing trial aborts the experiment.
    """
    tasks = [
        (config.problem, config.estimator, n, config.eval_grid_size,
         config.master_seed, ni, ti)
        for ni, n in enumerate(config.n_grid)
        for ti in range(config.trials)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            flat = list(pool.map(_trial_task, tasks, chunksize=8))
    else:
        flat = [_trial_task(t) for t in tasks]
    risks = np.array(flat, dtype=float).reshape(len(config.n_grid), config.trials)

    mean = risks.mean(axis=1)
    if config.trials > 1:
        stderr = risks.std(axis=1, ddof=1) / np.sqrt(config.trials)
    else:
        stderr = np.zeros(len(config.n_grid))
    zero_count = (risks == 0.0).sum(axis=1)

    n_arr = np.asarray(config.n_grid, dtype=float)
    notes = []
    alpha = config.problem.margin_exponent
    theoretical = config.estimator.theoretical_slope(alpha)
    if theoretical is None:
        notes.append("no-density problem: expect exponential decay, no polynomial slope")
    try:
        slope, intercept, usable = _fit_loglog(n_arr, mean)
        fitted_slope, fitted_coeff = slope, float(np.exp(intercept))
        excluded = int(len(n_arr) - usable.sum())
        if excluded:
            notes.append(
                f"fit used {int(usable.sum())} of {len(n_arr)} points "
                f"(top decade, zero-risk points dropped)"
            )
    except ExponentialRegime as exc:
        fitted_slope = fitted_coeff = None
        notes.append(f"exponential-regime: {exc}")

    return RateReport(
        n_grid=config.n_grid,
        risks=risks,
        mean=mean,
        stderr=stderr,
        zero_count=zero_count,
        fitted_slope=fitted_slope,
        fitted_coeff=fitted_coeff,
        theoretical_slope=theoretical,
        regime_note="; ".join(notes),
    )


def config_to_dict(config: RateExperimentConfig) -> dict:
    """Effective configuration with defaults resolved, for report echoing."""
    problem = {"kind": config.problem.kind, **asdict(config.problem)}
    estimator = {"kind": config.estimator.kind, **asdict(config.estimator)}
    return {
        "problem": problem,
        "estimator": estimator,
        "experiment": {
            "n_grid": list(config.n_grid),
            "trials": config.trials,
            "eval_grid_size": config.eval_grid_size,
            "master_seed": config.master_seed,
            "workers": config.workers,
        },
    }


def report_to_dict(report: RateReport, config: RateExperimentConfig | None = None) -> dict:
    out = {
        "per_n": [
            {
                "n": int(n),
                "mean_excess_risk": float(m),
                "stderr": float(s),
                "zero_count": int(z),
            }
            for n, m, s, z in zip(report.n_grid, report.mean, report.stderr,
                                  report.zero_count)
        ],
        "fitted_slope": report.fitted_slope,
        "fitted_coeff": report.fitted_coeff,
        "theoretical_slope": report.theoretical_slope,
        "regime_note": report.regime_note,
    }
    if config is not None:
        out["config"] = config_to_dict(config)
    return out


def write_report_json(report: RateReport, path, config=None) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report, config), fh, indent=2)
        fh.write("\n")


def write_trials_csv(report: RateReport, path) -> None:
    """Long-form per-trial risks: one row per (n, trial)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "trial", "excess_risk"])
        for ni, n in enumerate(report.n_grid):
            for ti in range(report.risks.shape[1]):
                w.writerow([n, ti, f"{report.risks[ni, ti]:.17g}"])


def write_summary_csv(report: RateReport, path) -> None:
    """Per-n aggregates ready for plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mean_excess_risk", "stderr", "zero_count"])
        for ni, n in enumerate(report.n_grid):
            w.writerow([
                n,
                f"{report.mean[ni]:.17g}",
                f"{report.stderr[ni]:.17g}",
                int(report.zero_count[ni]),
            ])
