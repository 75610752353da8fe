"""Generative problems with known conditional means, Bayes rules, and margins."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import (
    ContractViolation,
    FiniteLoss,
    binary_decode,
    binary_frontier_distance,
    frontier_distances,
    three_class_loss,
    zero_one_loss,
)
from .estimators import SampleSet

_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class SyntheticProblem:
    """Base contract: exact g*, f*, frontier distance, and a seeded sampler."""

    kind = "abstract"

    @property
    def loss(self) -> FiniteLoss:
        raise NotImplementedError

    @property
    def intervals(self) -> tuple:
        raise NotImplementedError

    @property
    def margin_exponent(self) -> float:
        """Low-density exponent alpha; inf marks the no-density regime."""
        raise NotImplementedError

    def eval_grid(self, size: int = 100) -> np.ndarray:
        """Midpoints of a regular size-cell partition of the support."""
        if size < 1:
            raise ContractViolation("grid size must be positive")
        lengths = np.array([hi - lo for lo, hi in self.intervals])
        counts = np.floor(size * lengths / lengths.sum()).astype(int)
        for i in range(size - counts.sum()):
            counts[i % len(counts)] += 1
        pieces = []
        for (lo, hi), c in zip(self.intervals, counts):
            step = (hi - lo) / c
            pieces.append(lo + (np.arange(c) + 0.5) * step)
        return np.concatenate(pieces)

    def _check_support(self, x: np.ndarray) -> None:
        inside = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (x >= lo - _SUPPORT_TOL) & (x <= hi + _SUPPORT_TOL)
        if not np.all(inside):
            raise ContractViolation(
                f"point outside the support of {self.kind}: "
                f"{np.asarray(x)[~inside].ravel()[:3]}"
            )

    def conditional_measure(self, x):
        raise NotImplementedError

    def exact_frontier_distance(self, x):
        raise NotImplementedError

    def bayes_predict(self, x):
        raise NotImplementedError

    def sample(self, n: int, seed) -> SampleSet:
        raise NotImplementedError

    def excess_risk(self, predictions, grid) -> float:
        raise NotImplementedError


class _BinaryProblem(SyntheticProblem):
    """Shared machinery for two-class problems with labels (-1, +1)."""

    @property
    def loss(self) -> FiniteLoss:
        return zero_one_loss((-1, 1))

    def g_scalar(self, x):
        """Conditional mean E[Y | X = x] in [-1, 1]."""
        raise NotImplementedError

    def conditional_measure(self, x):
        g = self.g_scalar(np.asarray(x, dtype=float))
        return np.stack([(1.0 - g) / 2.0, (1.0 + g) / 2.0], axis=-1)

    def exact_frontier_distance(self, x):
        # Scalar embedding fast path; the matrix embedding rescales by 1/sqrt(2).
        return binary_frontier_distance(self.g_scalar(np.asarray(x, dtype=float)))

    def bayes_predict(self, x):
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        out = binary_decode(self.g_scalar(arr))
        return int(out) if np.ndim(out) == 0 else out.astype(np.int64)

    def sample(self, n: int, seed) -> SampleSet:
        if n < 1:
            raise ContractViolation("sample size must be positive")
        rng = np.random.default_rng(seed)
        x = self._draw_inputs(rng, n)
        v = rng.uniform(size=n)
        labels = (v < (1.0 + self.g_scalar(x)) / 2.0).astype(np.int64)
        return SampleSet(x, labels)

    def _draw_inputs(self, rng, n: int) -> np.ndarray:
        raise NotImplementedError

    def excess_risk(self, predictions, grid) -> float:
        """Mean over the grid of 1{f_n != f*} |g*|, the exact excess risk
        contribution of each grid cell under the 0-1 loss."""
        pred = np.asarray(predictions)
        grid = np.asarray(grid, dtype=float)
        if pred.shape != grid.shape:
            raise ContractViolation("one prediction per grid point required")
        g = self.g_scalar(grid)
        fstar = binary_decode(g)
        return float(np.mean((pred != fstar) * np.abs(g)))


@dataclass(frozen=True)
class PowerMargin(_BinaryProblem):
    """Uniform inputs on [-1, 1] with g*(x) = sign(x) |x|^(1/alpha).

    Small alpha concentrates mass near the frontier (hard); large alpha
    pushes it away (easy).  P(|g*| < t) = t^alpha exactly.
    """

    alpha: float = 1.0
    kind = "power_margin"

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ContractViolation("alpha must be positive")

    @property
    def intervals(self):
        return ((-1.0, 1.0),)

    @property
    def margin_exponent(self) -> float:
        return self.alpha

    def g_scalar(self, x):
        return np.sign(x) * np.abs(x) ** (1.0 / self.alpha)

    def _draw_inputs(self, rng, n):
        return rng.uniform(-1.0, 1.0, size=n)

    def exact_margin_cdf(self, t):
        """Closed form P(d(g*(X), F) < t) = t^alpha, capped at 1."""
        return np.minimum(np.asarray(t, dtype=float) ** self.alpha, 1.0)


@dataclass(frozen=True)
class Staircase(_BinaryProblem):
    """Deterministic labels alternating on plateaus of width period/2.

    g*(x) is +1 within period/4 of a non-negative multiple of the period
    and -1 elsewhere, so |g*| = 1 everywhere: the no-density margin holds
    with t0 = 1 while the classes interleave at scale `period`.
    """

    period: float = 1.0 / 50.0
    kind = "staircase"

    def __post_init__(self):
        if not (0 < self.period <= 1):
            raise ContractViolation("period must lie in (0, 1]")

    @property
    def intervals(self):
        return ((-1.0, 1.0),)

    @property
    def margin_exponent(self) -> float:
        return math.inf

    def g_scalar(self, x):
        x = np.asarray(x, dtype=float)
        m = np.round(x / self.period)
        on = (m >= 0) & (np.abs(x - self.period * m) < self.period / 4.0)
        return np.where(on, 1.0, -1.0)

    def _draw_inputs(self, rng, n):
        return rng.uniform(-1.0, 1.0, size=n)


@dataclass(frozen=True)
class SeparatedSupport(_BinaryProblem):
    """Uniform inputs on [-1, -1/2] u [1/2, 1], g*(x) = sign(x)(1 - |x|)^p.

    The margin decays polynomially toward the support edges, giving the
    low-density condition with exponent 1/p.
    """

    p: float = 1.0
    kind = "separated_support"

    def __post_init__(self):
        if not (self.p > 0):
            raise ContractViolation("p must be positive")

    @property
    def intervals(self):
        return ((-1.0, -0.5), (0.5, 1.0))

    @property
    def margin_exponent(self) -> float:
        return 1.0 / self.p

    def g_scalar(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * (1.0 - np.abs(x)) ** self.p

    def _draw_inputs(self, rng, n):
        u = rng.uniform(-1.0, 1.0, size=n)
        return np.where(u < 0, -1.0 + (u + 1.0) * 0.5, 0.5 + u * 0.5)


@dataclass(frozen=True)
class ThreeClassSimplex(SyntheticProblem):
    """Conditional law tracing a line through the simplex over x in [0, 1].

    mu(x) = (1/3, (2/3)(1 - x), (2/3) x) starts inside the b region,
    crosses into the a region at x = 1/4 (passing the barycenter at
    x = 1/2), and leaves into the c region at x = 3/4, so every decision
    region and both frontier segments are exercised.
    """

    kind = "three_class_simplex"

    @property
    def loss(self) -> FiniteLoss:
        return three_class_loss()

    @property
    def intervals(self):
        return ((0.0, 1.0),)

    @property
    def margin_exponent(self) -> float:
        # mu(x) crosses each frontier transversally at unit speed in x,
        # so P(d < t) grows linearly near t = 0.
        return 1.0

    def conditional_measure(self, x):
        x = np.asarray(x, dtype=float)
        mu_a = np.full(x.shape, 1.0 / 3.0)
        mu_b = (2.0 / 3.0) * (1.0 - x)
        mu_c = (2.0 / 3.0) * x
        return np.stack([mu_a, mu_b, mu_c], axis=-1)

    def exact_frontier_distance(self, x):
        mus = np.atleast_2d(self.conditional_measure(x))
        d = frontier_distances(self.loss, mus)
        return float(d[0]) if np.ndim(x) == 0 else d

    def bayes_predict(self, x):
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        mus = np.atleast_2d(self.conditional_measure(arr))
        risks = mus @ self.loss.matrix.T
        idx = np.argmin(risks, axis=1)
        labels = np.array(self.loss.z_labels)[idx]
        return labels[0] if arr.ndim == 0 else labels

    def sample(self, n: int, seed) -> SampleSet:
        if n < 1:
            raise ContractViolation("sample size must be positive")
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.0, 1.0, size=n)
        v = rng.uniform(size=n)
        cum = np.cumsum(self.conditional_measure(x), axis=-1)
        labels = np.minimum((v[:, None] >= cum).sum(axis=1), 2).astype(np.int64)
        return SampleSet(x, labels)

    def excess_risk(self, predictions, grid) -> float:
        """Mean over the grid of risk(f_n) - risk(f*) under the exact law."""
        pred = np.asarray(predictions)
        grid = np.asarray(grid, dtype=float)
        if pred.shape != grid.shape:
            raise ContractViolation("one prediction per grid point required")
        mus = self.conditional_measure(grid)
        risks = mus @ self.loss.matrix.T
        z_index = {z: i for i, z in enumerate(self.loss.z_labels)}
        try:
            ip = np.array([z_index[z] for z in pred])
        except KeyError as exc:
            raise ContractViolation(f"unknown prediction label {exc}") from None
        istar = np.argmin(risks, axis=1)
        rows = np.arange(len(grid))
        return float(np.mean(risks[rows, ip] - risks[rows, istar]))


PROBLEM_KINDS = {
    "power_margin": PowerMargin,
    "staircase": Staircase,
    "separated_support": SeparatedSupport,
    "three_class_simplex": ThreeClassSimplex,
}


def make_problem(kind: str, **params) -> SyntheticProblem:
    """Instantiate a problem by kind name, e.g. from a parsed config."""
    if kind not in PROBLEM_KINDS:
        raise ContractViolation(
            f"unknown problem kind {kind!r}; choose from {sorted(PROBLEM_KINDS)}"
        )
    try:
        return PROBLEM_KINDS[kind](**params)
    except TypeError as exc:
        raise ContractViolation(f"bad parameters for {kind}: {exc}") from None
