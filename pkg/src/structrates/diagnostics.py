"""Margin diagnostics: empirical frontier-distance profiles and alpha fits."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .losses import ContractViolation, FiniteLoss, binary_frontier_distance, frontier_distances

DEFAULT_THRESHOLDS = 50
DEFAULT_T_MIN = 1e-3
DEFAULT_DROP = 0.10


class ProfileDegenerate(ContractViolation):
    """The profile has too few informative points to fit an exponent,
    typically because the problem sits in the no-density regime."""


@dataclass(frozen=True)
class MarginProfile:
    """Empirical cdf of the frontier distance d(g*(X), F) on a threshold grid."""

    thresholds: np.ndarray
    cdf: np.ndarray
    sample_count: int

    def __post_init__(self):
        t = np.array(self.thresholds, dtype=float)
        c = np.array(self.cdf, dtype=float)
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "cdf", c)
        if t.ndim != 1 or t.size < 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ContractViolation("thresholds must be positive and increasing")
        if c.shape != t.shape or np.any(c < 0) or np.any(c > 1) or np.any(np.diff(c) < 0):
            raise ContractViolation("cdf must be non-decreasing with values in [0, 1]")
        if self.sample_count < 1:
            raise ContractViolation("profile needs at least one evaluation point")


@dataclass(frozen=True)
class AlphaFit:
    """Least-squares fit of cdf(t) ~ c_alpha * t^alpha on the log-log scale."""

    alpha_hat: float
    c_alpha_hat: float
    r_squared: float
    fit_range: tuple[float, float]


def default_thresholds(distances, count: int = DEFAULT_THRESHOLDS, t_min: float = DEFAULT_T_MIN,
                       t_max: float | None = None) -> np.ndarray:
    """Log-spaced grid from t_min up to the largest observed distance."""
    if t_max is None:
        t_max = float(np.max(distances))
    t_max = max(t_max, t_min * 10.0)
    return np.logspace(np.log10(t_min), np.log10(t_max), count)


def margin_profile(source, eval_points=None, loss: FiniteLoss | None = None,
                   thresholds=None) -> MarginProfile:
    """Empirical margin profile cdf[j] = #{x: d(g*(x), F) < t_j} / N.

    source may be a synthetic problem (its exact frontier distance is
    evaluated at eval_points), a 1-d array of scalar conditional means in
    [-1, 1] (two-class fast path, distance |g|), or an (N, |Y|) block of
    conditional measures paired with an explicit loss.
    """
    if hasattr(source, "exact_frontier_distance"):
        if eval_points is None:
            raise ContractViolation("eval_points required with a problem source")
        pts = np.asarray(eval_points, dtype=float)
        if pts.size == 0:
            raise ContractViolation("eval_points must be nonempty")
        d = np.asarray(source.exact_frontier_distance(pts), dtype=float)
    else:
        arr = np.asarray(source, dtype=float)
        if arr.size == 0:
            raise ContractViolation("need at least one evaluation")
        if arr.ndim == 1:
            d = binary_frontier_distance(arr)
        elif arr.ndim == 2:
            if loss is None:
                raise ContractViolation("measure rows need an explicit loss")
            d = frontier_distances(loss, arr)
        else:
            raise ContractViolation("source must be 1-d means or (N, |Y|) measures")
    if thresholds is None:
        thresholds = default_thresholds(d)
    t = np.asarray(thresholds, dtype=float)
    cdf = (d[None, :] < t[:, None]).mean(axis=1)
    return MarginProfile(thresholds=t, cdf=cdf, sample_count=int(d.size))


def fit_alpha(profile: MarginProfile, fit_range: tuple[float, float] | None = None,
              drop: float = DEFAULT_DROP) -> AlphaFit:
    """Fit cdf(t) = c_alpha * t^alpha by least squares on (log t, log cdf).

    Only thresholds with cdf strictly inside (0, 1) enter the fit; by
    default the top and bottom `drop` fraction of the grid is discarded to
    avoid boundary saturation.  The window actually used is reported.
    """
    t, c = profile.thresholds, profile.cdf
    if fit_range is not None:
        lo, hi = fit_range
        window = (t >= lo) & (t <= hi)
    else:
        cut = int(np.floor(t.size * drop))
        window = np.zeros(t.size, dtype=bool)
        window[cut : t.size - cut] = True
    usable = window & (c > 0) & (c < 1)
    if usable.sum() < 3:
        raise ProfileDegenerate(
            "fewer than 3 grid points with cdf strictly inside (0, 1); "
            "no-density regime or threshold range too narrow"
        )
    x = np.log(t[usable])
    y = np.log(c[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if total == 0 else 1.0 - float(np.sum(resid**2)) / float(total)
    return AlphaFit(
        alpha_hat=float(slope),
        c_alpha_hat=float(np.exp(intercept)),
        r_squared=r2,
        fit_range=(float(t[usable].min()), float(t[usable].max())),
    )


def check_no_density(profile: MarginProfile):
    """Largest grid threshold with empirical cdf 0, or None if none exists.

    A positive return is an empirical lower bound on the no-density gap t0.
    """
    if profile.cdf[0] > 0:
        return None
    return float(profile.thresholds[profile.cdf == 0].max())


def save_profile_json(profile: MarginProfile, path, fit: AlphaFit | None = None,
                      t0=None) -> None:
    obj = {
        "thresholds": [float(v) for v in profile.thresholds],
        "cdf": [float(v) for v in profile.cdf],
        "sample_count": profile.sample_count,
        "alpha_hat": None if fit is None else fit.alpha_hat,
        "c_alpha_hat": None if fit is None else fit.c_alpha_hat,
        "r_squared": None if fit is None else fit.r_squared,
        "fit_range": None if fit is None else list(fit.fit_range),
        "no_density_t0": t0,
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def save_profile_csv(profile: MarginProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "cdf"])
        for t, c in zip(profile.thresholds, profile.cdf):
            w.writerow([f"{t:.17g}", f"{c:.17g}"])
