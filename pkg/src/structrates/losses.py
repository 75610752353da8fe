"""Finite loss tables, plug-in decoding, and decision-frontier geometry."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

# Absolute tolerance below which two risk values count as tied.
TIE_TOL = 1e-12


class ContractViolation(ValueError):
    """An operation was called outside its input contract."""


@dataclass(frozen=True)
class FiniteLoss:
    """A finite loss table ell(z, y) over ordered label sets.

    Rows index predictions z, columns index observations y.  Row z of the
    matrix is the prediction embedding psi(z) and phi(y) is the one-hot
    embedding of y, so ell(z, y) = <psi(z), phi(y)> holds exactly by
    construction.  Instances are immutable and safe to share across workers.
    """

    z_labels: tuple
    y_labels: tuple
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = tuple(self.z_labels)
        y = tuple(self.y_labels)
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "z_labels", z)
        object.__setattr__(self, "y_labels", y)
        object.__setattr__(self, "matrix", m)
        if len(z) < 2:
            raise ContractViolation("need at least two prediction labels")
        if len(y) < 1:
            raise ContractViolation("need at least one observation label")
        if len(set(z)) != len(z) or len(set(y)) != len(y):
            raise ContractViolation("labels must be distinct")
        if m.shape != (len(z), len(y)):
            raise ContractViolation(
                f"matrix shape {m.shape} does not match labels ({len(z)}, {len(y)})"
            )
        if not np.all(np.isfinite(m)):
            raise ContractViolation("loss entries must be finite")
        if np.any(m < 0):
            raise ContractViolation("loss entries must be non-negative")

    @property
    def n_z(self) -> int:
        return len(self.z_labels)

    @property
    def n_y(self) -> int:
        return len(self.y_labels)

    def psi(self, z_index: int) -> np.ndarray:
        """Embedding of prediction z_index: row z of the matrix."""
        return self.matrix[z_index]

    @property
    def psi_bound(self) -> float:
        """c_psi = max_z ||psi(z)||_2."""
        return float(np.max(np.linalg.norm(self.matrix, axis=1)))

    def psi_pair_norms(self) -> np.ndarray:
        """Pairwise ||psi(z) - psi(z')||_2 as an (n_z, n_z) matrix."""
        diff = self.matrix[:, None, :] - self.matrix[None, :, :]
        return np.linalg.norm(diff, axis=2)

    def z_index(self, label) -> int:
        try:
            return self.z_labels.index(label)
        except ValueError:
            raise ContractViolation(f"unknown prediction label {label!r}") from None

    def y_index(self, label) -> int:
        try:
            return self.y_labels.index(label)
        except ValueError:
            raise ContractViolation(f"unknown observation label {label!r}") from None


def zero_one_loss(labels) -> FiniteLoss:
    """0-1 loss over a shared label set: ell(z, y) = 1{z != y}."""
    labels = tuple(labels)
    m = 1.0 - np.eye(len(labels))
    return FiniteLoss(labels, labels, m)


def three_class_loss() -> FiniteLoss:
    """Three labels a, b, c with cost 1 for confusing a against b or c
    and cost 2 for confusing b against c."""
    m = np.array(
        [
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 2.0],
            [1.0, 2.0, 0.0],
        ]
    )
    return FiniteLoss(("a", "b", "c"), ("a", "b", "c"), m)


def _as_measure(loss: FiniteLoss, mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (loss.n_y,):
        raise ContractViolation(
            f"measure has shape {mu.shape}, expected ({loss.n_y},)"
        )
    return mu


def risk_vector(loss: FiniteLoss, mu) -> np.ndarray:
    """Expected loss of each prediction z under the weight vector mu.

    values[z] = sum_y ell(z, y) * mu[y], i.e. the loss matrix applied to mu.
    mu may be signed (kernel estimates are), not only a probability vector.
    """
    return loss.matrix @ _as_measure(loss, mu)


def decode(loss: FiniteLoss, mu):
    """Plug-in decoding: the prediction label minimizing the risk vector.

    Ties are broken toward the lowest index in z_labels, which keeps the
    rule deterministic where the argmin is set-valued.
    """
    return loss.z_labels[int(np.argmin(risk_vector(loss, mu)))]


def margin_gap(loss: FiniteLoss, mu) -> float:
    """Gap gamma between the second-smallest and smallest risk values.

    gamma = 0 exactly when mu lies on the decision frontier.
    """
    r = np.partition(risk_vector(loss, mu), 1)
    return float(r[1] - r[0])


def frontier_distance(loss: FiniteLoss, mu) -> float:
    """Euclidean distance from mu to the decision frontier in R^{|Y|}.

    With z* the decoded label, the frontier piece where z' ties z* is the
    hyperplane <psi(z') - psi(z*), xi> = 0, and the distance from mu to it
    is the risk gap divided by ||psi(z') - psi(z*)||.  The minimum over z'
    is the exact distance: no point with a different decode lies closer.
    Duplicate psi rows that tie the minimizer put mu on the frontier (d=0);
    duplicate rows with a positive gap can never tie and are skipped.
    """
    mu = _as_measure(loss, mu)
    return float(frontier_distances(loss, mu[None, :])[0])


def frontier_distances(loss: FiniteLoss, mus) -> np.ndarray:
    """Vectorized frontier_distance over rows of an (N, |Y|) array."""
    mus = np.asarray(mus, dtype=float)
    if mus.ndim != 2 or mus.shape[1] != loss.n_y:
        raise ContractViolation(
            f"measure block has shape {mus.shape}, expected (N, {loss.n_y})"
        )
    risks = mus @ loss.matrix.T
    z_star = np.argmin(risks, axis=1)
    gaps = risks - risks[np.arange(len(mus)), z_star][:, None]
    norms = loss.psi_pair_norms()[z_star]

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.maximum(gaps, 0.0) / norms
    degenerate = norms == 0.0
    # z' = z* contributes nothing; duplicate rows tie permanently when
    # co-minimal and are unreachable otherwise.
    ratio[degenerate & (gaps <= TIE_TOL)] = 0.0
    ratio[degenerate & (gaps > TIE_TOL)] = np.inf
    ratio[np.arange(len(mus)), z_star] = np.inf

    # A duplicate row tying the minimizer forces d = 0 through its own slot;
    # the masked slots cannot win the minimum for any valid loss.
    return ratio.min(axis=1)


def sandwich_constants(loss: FiniteLoss) -> tuple[float, float]:
    """Constants (c, c') with c*gamma <= frontier distance <= c'*gamma.

    c is one over the largest pairwise psi-row norm and c' one over the
    smallest nonzero pairwise norm.
    """
    norms = loss.psi_pair_norms()
    off = norms[~np.eye(loss.n_z, dtype=bool)]
    nonzero = off[off > 0]
    if nonzero.size == 0:
        raise ContractViolation("all prediction rows identical")
    return 1.0 / float(nonzero.max()), 1.0 / float(nonzero.min())


def binary_frontier_distance(g):
    """Frontier distance |g| in the scalar two-class embedding.

    For binary labels embedded as +-1 with g = E[Y|X=x] in [-1, 1], the
    frontier is the single point 0 and the distance reduces to |g|.
    """
    g = np.asarray(g, dtype=float)
    if np.any(np.abs(g) > 1.0 + 1e-12):
        raise ContractViolation("scalar conditional means must lie in [-1, 1]")
    out = np.abs(g)
    return float(out) if out.ndim == 0 else out


def binary_decode(g, labels=(-1, 1)):
    """Sign rule matching matrix decode on the 0-1 loss over labels.

    g > 0 picks labels[1], g < 0 picks labels[0], and an exact tie falls
    back to the first label, mirroring the lowest-index convention.
    """
    g = np.asarray(g, dtype=float)
    out = np.where(g > 0, labels[1], labels[0])
    return out[()] if out.ndim == 0 else out


def load_loss_csv(path) -> FiniteLoss:
    """Read a loss table: header row = y labels, first column = z labels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ContractViolation(f"{path}: expected a header row and data rows")
    y_labels = tuple(cell.strip() for cell in rows[0][1:])
    z_labels = tuple(row[0].strip() for row in rows[1:])
    try:
        matrix = np.array([[float(c) for c in row[1:]] for row in rows[1:]])
    except ValueError as exc:
        raise ContractViolation(f"{path}: non-numeric loss entry ({exc})") from None
    return FiniteLoss(z_labels, y_labels, matrix)


def save_loss_csv(loss: FiniteLoss, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + [str(y) for y in loss.y_labels])
        for z, row in zip(loss.z_labels, loss.matrix):
            w.writerow([str(z)] + [f"{v:.17g}" for v in row])


def load_loss_json(path) -> FiniteLoss:
    """Read a loss table from {"z": [...], "y": [...], "matrix": [[...]]}."""
    with open(path) as fh:
        obj = json.load(fh)
    missing = {"z", "y", "matrix"} - set(obj)
    if missing:
        raise ContractViolation(f"{path}: missing keys {sorted(missing)}")
    return FiniteLoss(tuple(obj["z"]), tuple(obj["y"]), np.array(obj["matrix"]))


def save_loss_json(loss: FiniteLoss, path) -> None:
    obj = {
        "z": list(loss.z_labels),
        "y": list(loss.y_labels),
        "matrix": [[float(v) for v in row] for row in loss.matrix],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_loss(path) -> FiniteLoss:
    """Dispatch on file suffix: .csv or .json."""
    s = str(path)
    if s.endswith(".json"):
        return load_loss_json(path)
    if s.endswith(".csv"):
        return load_loss_csv(path)
    raise ContractViolation(f"unsupported loss file format: {s}")
