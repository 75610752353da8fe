"""Synthetic problems: supports, exact frontier distances, sampling laws."""

import numpy as np
import pytest

from structrates import (
    ContractViolation,
    PROBLEM_KINDS,
    make_problem,
    three_class_loss,
)


# ------------------------------------------------------------------ factory

def test_make_problem_kinds():
    assert set(PROBLEM_KINDS) == {
        "power_margin", "staircase", "separated_support", "three_class_simplex",
    }
    for kind in PROBLEM_KINDS:
        assert make_problem(kind).kind == kind
    with pytest.raises(ContractViolation):
        make_problem("nope")
    with pytest.raises(ContractViolation):
        make_problem("power_margin", alpha=-1.0)
    with pytest.raises(ContractViolation):
        make_problem("power_margin", aleph=1.0)  # unknown parameter


def test_sampling_is_seed_deterministic():
    for kind in PROBLEM_KINDS:
        prob = make_problem(kind)
        a = prob.sample(100, 5)
        b = prob.sample(100, 5)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.labels, b.labels)
        c = prob.sample(100, 6)
        assert not np.array_equal(a.inputs, c.inputs)


# ---------------------------------------------------------------- eval grid

def test_eval_grid_midpoints_single_interval():
    prob = make_problem("power_margin", alpha=1.0)
    grid = prob.eval_grid(100)
    assert grid.shape == (100,)
    step = 2.0 / 100
    np.testing.assert_allclose(grid[0], -1.0 + step / 2)
    np.testing.assert_allclose(grid[-1], 1.0 - step / 2)
    np.testing.assert_allclose(np.diff(grid), step)


def test_eval_grid_splits_across_intervals():
    prob = make_problem("separated_support", p=1.0)
    grid = prob.eval_grid(10)
    assert grid.shape == (10,)
    assert np.sum(grid < 0) == 5 and np.sum(grid > 0) == 5
    assert np.all((np.abs(grid) >= 0.5) & (np.abs(grid) <= 1.0))


# ------------------------------------------------------------- power margin

def test_power_margin_bayes_and_distance():
    prob = make_problem("power_margin", alpha=2.0)
    x = np.array([-0.5, -0.1, 0.1, 0.5])
    g = np.sign(x) * np.abs(x) ** (1.0 / 2.0)
    np.testing.assert_array_equal(prob.bayes_predict(x), np.sign(x).astype(int))
    np.testing.assert_allclose(prob.exact_frontier_distance(x), np.abs(g))
    # margin law: P(|g(X)| < t) = t^alpha for X uniform on [-1, 1]
    np.testing.assert_allclose(prob.exact_margin_cdf(np.array([0.3, 1.5])),
                               [0.09, 1.0])


def test_power_margin_empirical_margin_law():
    prob = make_problem("power_margin", alpha=0.5)
    data = prob.sample(200000, 8)
    d = prob.exact_frontier_distance(data.inputs[:, 0])
    for t in (0.1, 0.3, 0.7):
        assert abs(np.mean(d < t) - t**0.5) < 5e-3


def test_power_margin_label_law():
    # labels are +1 with probability (1 + g) / 2
    prob = make_problem("power_margin", alpha=1.0)
    data = prob.sample(400000, 9)
    x = data.inputs[:, 0]
    right = x > 0.5  # E[label] = (1 + E[g | g > .5-ish]) / 2
    expect = np.mean((1.0 + x[right]) / 2.0)
    assert abs(np.mean(data.labels[right]) - expect) < 5e-3
    assert set(np.unique(data.labels)) <= {0, 1}


def test_power_margin_excess_risk_values():
    prob = make_problem("power_margin", alpha=1.0)
    grid = prob.eval_grid(100)
    fstar = prob.bayes_predict(grid)
    assert prob.excess_risk(fstar, grid) == 0.0
    # constant +1 errs on the negative half; mean |x| there is exactly 1/4
    const = np.ones_like(fstar)
    assert abs(prob.excess_risk(const, grid) - 0.25) < 1e-12
    with pytest.raises(ContractViolation):
        prob.excess_risk(fstar[:10], grid)


def test_power_margin_rejects_points_off_support():
    prob = make_problem("power_margin", alpha=1.0)
    with pytest.raises(ContractViolation):
        prob.bayes_predict(np.array([1.5]))


# ---------------------------------------------------------------- staircase

def test_staircase_plateau_structure():
    prob = make_problem("staircase")
    p = 1.0 / 50.0
    # band centers: +1 on multiples m >= 0 of the period, -1 elsewhere
    assert prob.bayes_predict(np.array([0.0]))[0] == 1
    assert prob.bayes_predict(np.array([3 * p]))[0] == 1
    assert prob.bayes_predict(np.array([-3 * p]))[0] == -1
    assert prob.bayes_predict(np.array([p / 2]))[0] == -1  # between bands
    np.testing.assert_array_equal(
        prob.exact_frontier_distance(np.array([0.0, p / 2, -0.7])), 1.0
    )
    assert prob.margin_exponent == np.inf


def test_staircase_default_grid_sits_on_negative_plateaus():
    # the 100-point midpoint grid lands at band centers decoded to -1:
    # a constant -1 predictor has exactly zero excess risk there
    prob = make_problem("staircase")
    grid = prob.eval_grid(100)
    fstar = prob.bayes_predict(grid)
    np.testing.assert_array_equal(fstar, -1)
    assert prob.excess_risk(-np.ones(100, dtype=int), grid) == 0.0


# --------------------------------------------------------- separated support

def test_separated_support_gap_and_law():
    prob = make_problem("separated_support", p=2.0)
    data = prob.sample(50000, 10)
    x = data.inputs[:, 0]
    assert np.all((np.abs(x) >= 0.5) & (np.abs(x) <= 1.0))
    np.testing.assert_array_equal(prob.bayes_predict(x), np.sign(x).astype(int))
    np.testing.assert_allclose(
        prob.exact_frontier_distance(x), (1.0 - np.abs(x)) ** 2.0
    )
    assert prob.margin_exponent == 0.5  # alpha = 1 / p
    with pytest.raises(ContractViolation):
        prob.bayes_predict(np.array([0.0]))  # the gap is off-support


# --------------------------------------------------------------- three class

def test_three_class_regions_and_crossings():
    prob = make_problem("three_class_simplex")
    assert prob.loss.z_labels == three_class_loss().z_labels
    x = np.array([0.1, 0.5, 0.9])
    np.testing.assert_array_equal(prob.bayes_predict(x), ["b", "a", "c"])
    # risk crossings at x = 1/4 and 3/4 are exact frontier points
    d = prob.exact_frontier_distance(np.array([0.25, 0.75]))
    np.testing.assert_allclose(d, 0.0, atol=1e-15)
    # the x = 1/2 barycenter-like point: distance 1 / (3 sqrt 3)
    np.testing.assert_allclose(
        prob.exact_frontier_distance(np.array([0.5])), 1.0 / (3 * np.sqrt(3))
    )
    mu = prob.conditional_measure(np.array([0.5]))
    np.testing.assert_allclose(mu, [[1 / 3, 1 / 3, 1 / 3]])


def test_three_class_sampling_and_excess_risk():
    prob = make_problem("three_class_simplex")
    data = prob.sample(60000, 11)
    assert set(np.unique(data.labels)) == {0, 1, 2}
    # P(Y = 0) = 1/3 everywhere
    assert abs(np.mean(data.labels == 0) - 1 / 3) < 5e-3
    grid = prob.eval_grid(99)
    fstar = prob.bayes_predict(grid)
    assert set(np.unique(fstar)) == {"a", "b", "c"}
    assert prob.excess_risk(fstar, grid) == 0.0
    # any wrong constant pays a positive excess risk
    assert prob.excess_risk(np.full(99, "a"), grid) > 0.0


def test_three_class_margin_exponent_is_linear():
    prob = make_problem("three_class_simplex")
    rng = np.random.default_rng(12)
    x = rng.uniform(0.0, 1.0, size=200000)
    d = prob.exact_frontier_distance(x)
    # linear crossings: P(d < t) ~ c t near 0
    small, large = np.mean(d < 0.01), np.mean(d < 0.02)
    assert abs(large / small - 2.0) < 0.15
    assert prob.margin_exponent == 1.0
