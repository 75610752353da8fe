"""Rate-experiment harness: schedules, slope fits, reproducibility, reports."""

import json

import numpy as np
import pytest

from structrates import (
    ContractViolation,
    ExponentialRegime,
    KernelSpec,
    KnnSpec,
    KrrSpec,
    RateExperimentConfig,
    fit_slope,
    make_problem,
    rate_experiment,
    run_trial,
    write_report_json,
    write_summary_csv,
    write_trials_csv,
)
from structrates.harness import config_to_dict, report_to_dict


def tiny_config(**overrides):
    base = dict(
        problem=make_problem("power_margin", alpha=1.0),
        estimator=KnnSpec(),
        n_grid=(20, 60, 180),
        trials=4,
        eval_grid_size=50,
        master_seed=3,
    )
    base.update(overrides)
    return RateExperimentConfig(**base)


# -------------------------------------------------------------------- specs

def test_knn_spec_schedule_and_slope():
    spec = KnnSpec(k0=1.0, beta=1.0)
    assert spec.neighbor_count(1000) == 100
    assert KnnSpec(fixed_k=7).neighbor_count(1000) == 7
    # excess-risk exponent -beta (alpha + 1) / (2 beta + 1)
    assert abs(spec.theoretical_slope(1.0) + 2.0 / 3.0) < 1e-15
    assert abs(spec.theoretical_slope(0.1) + 1.1 / 3.0) < 1e-15
    assert spec.theoretical_slope(np.inf) is None  # exponential regime


def test_krr_spec_schedule_and_slope():
    spec = KrrSpec(kernel=KernelSpec("gaussian", 0.5), lambda0=1.0, q=0.5, sigma=1.0)
    assert spec.regularizer(10**4) == 0.01
    assert KrrSpec(fixed_lambda=0.3).regularizer(10**4) == 0.3
    # excess-risk exponent -(q - p)(1 + alpha) / (2 q + sigma)
    assert abs(spec.theoretical_slope(1.0) + 0.5) < 1e-15
    assert KrrSpec(q=0.5, p=0.25).theoretical_slope(1.0) == pytest.approx(-0.25)


def test_config_validation():
    with pytest.raises(ContractViolation):
        tiny_config(n_grid=(100, 50))  # must increase
    with pytest.raises(ContractViolation):
        tiny_config(trials=0)
    with pytest.raises(ContractViolation):
        tiny_config(eval_grid_size=0)
    with pytest.raises(ContractViolation):
        tiny_config(workers=0)


# ---------------------------------------------------------------- slope fit

def test_fit_slope_recovers_exact_power_law():
    n = np.array([10, 100, 1000, 10000])
    for slope in (-0.5, -2.0 / 3.0, -1.0):
        risks = 3.0 * n.astype(float) ** slope
        got = fit_slope(n, risks, window=(n[0], n[-1]))
        assert abs(got - slope) < 1e-12


def test_fit_slope_top_decade_window():
    n = np.array([10, 100, 1000, 2000, 5000, 10000])
    risks = n.astype(float) ** -1.0
    risks[0] = 50.0  # junk outside the top decade must not matter
    assert abs(fit_slope(n, risks) + 1.0) < 1e-12


def test_fit_slope_exponential_regime():
    n = np.array([10, 100, 1000, 10000])
    with pytest.raises(ExponentialRegime):
        fit_slope(n, np.array([0.5, 0.1, 0.0, 0.0]))  # too few positive points
    with pytest.raises(ExponentialRegime):
        fit_slope(n, np.array([0.5, 0.1, 0.01, 0.001]), window=(5000, 10000))


# ------------------------------------------------------------------- trials

def test_run_trial_is_seed_deterministic():
    prob = make_problem("power_margin", alpha=1.0)
    a = run_trial(prob, KnnSpec(), 50, 20, 123)
    b = run_trial(prob, KnnSpec(), 50, 20, 123)
    assert a == b
    assert 0.0 <= a <= 1.0


def test_run_trial_krr_path():
    prob = make_problem("separated_support", p=1.0)
    est = KrrSpec(kernel=KernelSpec("gaussian", 0.1), lambda0=1.0)
    r = run_trial(prob, est, 80, 20, 7)
    assert 0.0 <= r <= 1.0


def test_rate_experiment_reproducible_and_aggregates():
    config = tiny_config()
    rep1 = rate_experiment(config)
    rep2 = rate_experiment(config)
    np.testing.assert_array_equal(rep1.risks, rep2.risks)
    assert rep1.risks.shape == (3, 4)
    np.testing.assert_allclose(rep1.mean, rep1.risks.mean(axis=1))
    np.testing.assert_allclose(
        rep1.stderr, rep1.risks.std(axis=1, ddof=1) / np.sqrt(4)
    )
    np.testing.assert_array_equal(
        rep1.zero_count, (rep1.risks == 0.0).sum(axis=1)
    )
    assert rep1.theoretical_slope == pytest.approx(-2.0 / 3.0)


def test_rate_experiment_trials_keyed_by_index_not_order():
    # growing the n grid must not change the risks of the shared prefix
    short = rate_experiment(tiny_config())
    long = rate_experiment(tiny_config(n_grid=(20, 60, 180, 540)))
    np.testing.assert_array_equal(long.risks[:3], short.risks)


def test_rate_experiment_parallel_matches_serial():
    serial = rate_experiment(tiny_config(workers=1))
    parallel = rate_experiment(tiny_config(workers=2))
    np.testing.assert_array_equal(serial.risks, parallel.risks)


def test_rate_experiment_exponential_regime_note():
    prob = make_problem("staircase")
    config = RateExperimentConfig(
        problem=prob, estimator=KnnSpec(k0=1.0, beta=0.5),
        n_grid=(2000, 6000, 20000), trials=3, eval_grid_size=100, master_seed=1,
    )
    rep = rate_experiment(config)
    assert rep.theoretical_slope is None
    assert "no-density" in rep.regime_note


# ------------------------------------------------------------------ reports

def test_config_to_dict_echoes_defaults():
    d = config_to_dict(tiny_config())
    assert d["problem"]["kind"] == "power_margin"
    assert d["problem"]["alpha"] == 1.0
    assert d["estimator"]["kind"] == "knn"
    assert d["estimator"]["k0"] == 1.0
    assert d["experiment"]["trials"] == 4
    assert d["experiment"]["master_seed"] == 3
    json.dumps(d)  # must be serializable as-is


def test_report_files(tmp_path):
    config = tiny_config()
    rep = rate_experiment(config)
    write_report_json(rep, tmp_path / "report.json", config)
    write_trials_csv(rep, tmp_path / "trials.csv")
    write_summary_csv(rep, tmp_path / "summary.csv")

    obj = json.loads((tmp_path / "report.json").read_text())
    assert [row["n"] for row in obj["per_n"]] == [20, 60, 180]
    assert obj["config"]["experiment"]["master_seed"] == 3
    assert "theoretical_slope" in obj and "fitted_slope" in obj

    lines = (tmp_path / "trials.csv").read_text().splitlines()
    assert lines[0] == "n,trial,excess_risk"
    assert len(lines) == 1 + 3 * 4

    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0] == "n,mean_excess_risk,stderr,zero_count"
    assert len(lines) == 4

    # identical rerun produces identical bytes
    rep2 = rate_experiment(config)
    write_trials_csv(rep2, tmp_path / "trials2.csv")
    assert (tmp_path / "trials.csv").read_bytes() == (tmp_path / "trials2.csv").read_bytes()


def test_report_to_dict_without_config():
    rep = rate_experiment(tiny_config())
    obj = report_to_dict(rep)
    assert "config" not in obj
    assert len(obj["per_n"]) == 3
