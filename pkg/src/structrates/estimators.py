"""Weight-producing surrogate estimators: k-NN local averaging and KRR."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .losses import ContractViolation, FiniteLoss


@dataclass(frozen=True)
class SampleSet:
    """An i.i.d. training sample (X_i, Y_i), labels stored as y indices."""

    inputs: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.array(self.inputs, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.labels, dtype=np.int64)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "labels", y)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ContractViolation("inputs must be a nonempty (n, d) array")
        if not np.all(np.isfinite(x)):
            raise ContractViolation("input coordinates must be finite")
        if y.shape != (x.shape[0],):
            raise ContractViolation("labels must pair one index per input point")
        if np.any(y < 0):
            raise ContractViolation("labels are indices into y_labels, so >= 0")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def _as_queries(data: SampleSet, queries) -> tuple[np.ndarray, bool]:
    q = np.asarray(queries, dtype=float)
    single = q.ndim <= 1
    q = np.atleast_2d(q)
    if q.shape[1] != data.dim:
        raise ContractViolation(
            f"query dimension {q.shape[1]} does not match data dimension {data.dim}"
        )
    return q, single


def knn_weights_batch(queries, data: SampleSet, k: int, metric: str = "euclidean") -> np.ndarray:
    """k-NN weight profiles for an (m, d) block of queries, one row each.

    Each row sums to 1: the k nearest points get 1/k, except that a group
    of p points tied at the k-th distance with m points strictly closer
    shares the remaining k - m slots, (k - m) / (p k) each.  Ties are
    detected by exact floating-point equality of computed distances.
    """
    if metric != "euclidean":
        raise ContractViolation(f"unsupported metric {metric!r}")
    if not (1 <= k <= data.n):
        raise ContractViolation(f"need 1 <= k <= n, got k={k}, n={data.n}")
    q, _ = _as_queries(data, queries)
    diff = q[:, None, :] - data.inputs[None, :, :]
    dist = np.sqrt(np.einsum("mnd,mnd->mn", diff, diff))
    kth = np.partition(dist, k - 1, axis=1)[:, k - 1 : k]
    lt = dist < kth
    eq = dist == kth
    m = lt.sum(axis=1, keepdims=True)
    p = eq.sum(axis=1, keepdims=True)
    return lt / k + eq * (k - m) / (p * k)


def knn_weights(query, data: SampleSet, k: int, metric: str = "euclidean") -> np.ndarray:
    """Weight profile alpha(x) of the k-NN local-averaging estimator."""
    q, single = _as_queries(data, query)
    w = knn_weights_batch(q, data, k, metric)
    return w[0] if single else w


@dataclass(frozen=True)
class KernelSpec:
    """A positive semi-definite kernel: family name plus bandwidth."""

    family: str = "gaussian"
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.family not in ("gaussian", "laplacian"):
            raise ContractViolation(f"unknown kernel family {self.family!r}")
        if not (self.bandwidth > 0):
            raise ContractViolation("bandwidth must be positive")

    def matrix(self, a, b) -> np.ndarray:
        """Gram block k(a_i, b_j) for (m, d) and (n, d) point arrays."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        diff = a[:, None, :] - b[None, :, :]
        if self.family == "gaussian":
            sq = np.einsum("mnd,mnd->mn", diff, diff)
            return np.exp(-sq / (2.0 * self.bandwidth**2))
        return np.exp(-np.abs(diff).sum(axis=2) / self.bandwidth)


@dataclass(frozen=True)
class KrrFactorization:
    """Cached SPD factorization of (K_hat + lambda I), reusable per query."""

    factor: tuple = field(repr=False)
    lam: float = 0.0
    n: int = 0


def krr_fit(data: SampleSet, kernel: KernelSpec, lam: float) -> KrrFactorization:
    """Factorize (K_hat + lambda I) with K_hat[i, j] = k(X_i, X_j) / n.

    The 1/n scaling keeps the ridge system well conditioned as n grows.
    K_hat is PSD, so the shifted matrix is SPD for any lambda > 0 and a
    Cholesky factorization exists; it is reused across all queries.
    """
    if not (lam > 0):
        raise ContractViolation("lambda must be positive")
    gram = kernel.matrix(data.inputs, data.inputs) / data.n
    if not np.all(np.isfinite(gram)):
        raise ContractViolation("kernel produced non-finite values")
    factor = cho_factor(gram + lam * np.eye(data.n), lower=True)
    return KrrFactorization(factor=factor, lam=float(lam), n=data.n)


def krr_weights(query, fact: KrrFactorization, data: SampleSet, kernel: KernelSpec) -> np.ndarray:
    """Signed weight profile alpha(x) = (K_hat + lambda)^{-1} K_hat_x.

    Accepts a single query point (returns shape (n,)) or an (m, d) block
    (returns (m, n)).  Read-only use of the cached factorization.
    """
    if fact.n != data.n:
        raise ContractViolation("factorization was built from a different sample")
    q, single = _as_queries(data, query)
    kx = kernel.matrix(data.inputs, q) / data.n
    alpha = cho_solve(fact.factor, kx)
    return alpha[:, 0] if single else alpha.T


def predict_surrogate(profile, data: SampleSet, loss: FiniteLoss) -> np.ndarray:
    """Aggregate a weight profile into a measure over y labels.

    weights[y] = sum of alpha_i over samples labeled y; decoding the result
    yields the plug-in prediction f_n(x).  A (m, n) block of profiles gives
    an (m, |Y|) block of measures.
    """
    alpha = np.asarray(profile, dtype=float)
    if alpha.shape[-1] != data.n:
        raise ContractViolation(
            f"profile length {alpha.shape[-1]} does not match sample size {data.n}"
        )
    if np.any(data.labels >= loss.n_y):
        raise ContractViolation("sample labels fall outside y_labels")
    if alpha.ndim == 1:
        return np.bincount(data.labels, weights=alpha, minlength=loss.n_y)
    return np.stack(
        [np.bincount(data.labels, weights=row, minlength=loss.n_y) for row in alpha]
    )


def knn_schedule(n: int, k0: float, beta: float) -> int:
    """Theory-driven neighbor count floor(k0 * n^(2 beta / (2 beta + 1))).

    Clamped into [1, n].  A relative nudge keeps exact powers (for example
    1000^(2/3) = 100) from landing one below the integer they equal.
    """
    if n < 1 or not (k0 > 0) or not (beta > 0):
        raise ContractViolation("need n >= 1, k0 > 0, beta > 0")
    v = k0 * float(n) ** (2.0 * beta / (2.0 * beta + 1.0))
    k = math.floor(v * (1.0 + 1e-12))
    return max(1, min(n, k))


def krr_schedule(n: int, lambda0: float, q: float, sigma: float) -> float:
    """Theory-driven regularizer lambda0 * n^(-1 / (2 q + sigma))."""
    if n < 1 or not (lambda0 > 0):
        raise ContractViolation("need n >= 1 and lambda0 > 0")
    if not (2.0 * q + sigma > 0):
        raise ContractViolation("need 2 q + sigma > 0")
    return lambda0 * float(n) ** (-1.0 / (2.0 * q + sigma))


def load_dataset_csv(path, loss: FiniteLoss) -> SampleSet:
    """Read columns x_0..x_{d-1}, y; y cells must name labels of the loss."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ContractViolation(f"{path}: expected a header row and data rows")
    header = [c.strip() for c in rows[0]]
    if header[-1] != "y" or not all(
        h == f"x_{i}" for i, h in enumerate(header[:-1])
    ):
        raise ContractViolation(f"{path}: expected header x_0..x_{{d-1}}, y")
    by_name = {str(label): i for i, label in enumerate(loss.y_labels)}
    xs, ys = [], []
    for row in rows[1:]:
        xs.append([float(c) for c in row[:-1]])
        cell = row[-1].strip()
        if cell not in by_name:
            raise ContractViolation(f"{path}: unknown observation label {cell!r}")
        ys.append(by_name[cell])
    return SampleSet(np.array(xs), np.array(ys))


def save_dataset_csv(data: SampleSet, loss: FiniteLoss, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{i}" for i in range(data.dim)] + ["y"])
        for x, y in zip(data.inputs, data.labels):
            w.writerow([f"{v:.17g}" for v in x] + [str(loss.y_labels[int(y)])])
