"""Command-line front end: experiments, profiles, region tables, prediction."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from .diagnostics import (
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
    SampleSet,
    knn_schedule,
    knn_weights_batch,
    krr_fit,
    krr_schedule,
    krr_weights,
    predict_surrogate,
)
from .harness import (
    KnnSpec,
    KrrSpec,
    RateExperimentConfig,
    rate_experiment,
    write_report_json,
    write_summary_csv,
    write_trials_csv,
)
from .losses import (
    TIE_TOL,
    ContractViolation,
    frontier_distances,
    load_loss,
    three_class_loss,
)
from .synthetic import make_problem

DEFAULT_SLOPE_TOLERANCE = 0.15
WORKERS_ENV = "STRUCTRATES_WORKERS"


class ConfigError(Exception):
    """Malformed configuration; maps to exit status 2."""


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if str(path).endswith(".json"):
        try:
            return json.loads(raw.decode())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return tomllib.loads(raw.decode())
    except tomllib.TOMLDecodeError as exc:
        # tomllib already reports line and column in the message
        raise ConfigError(f"{path}: {exc}") from None


def _check_keys(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config key {where}.{unknown[0]}")


_PROBLEM_PARAMS = {
    "power_margin": ("alpha",),
    "staircase": ("period",),
    "separated_support": ("p",),
    "three_class_simplex": (),
}


def _build_problem(cfg: dict):
    kind = cfg.get("kind", "power_margin")
    if kind not in _PROBLEM_PARAMS:
        raise ConfigError(f"unknown problem kind {kind!r}")
    _check_keys(cfg, ("kind",) + _PROBLEM_PARAMS[kind], "problem")
    params = {k: cfg[k] for k in _PROBLEM_PARAMS[kind] if k in cfg}
    try:
        return make_problem(kind, **params)
    except ContractViolation as exc:
        raise ConfigError(f"problem: {exc}") from None


def _build_kernel(cfg: dict, where: str) -> KernelSpec:
    try:
        return KernelSpec(
            family=cfg.get("kernel", "gaussian"),
            bandwidth=cfg.get("bandwidth", 1.0),
        )
    except ContractViolation as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _build_estimator(cfg: dict):
    kind = cfg.get("kind", "knn")
    if kind == "knn":
        _check_keys(cfg, ("kind", "k0", "beta", "fixed_k"), "estimator")
        try:
            return KnnSpec(
                k0=cfg.get("k0", 1.0),
                beta=cfg.get("beta", 1.0),
                fixed_k=cfg.get("fixed_k"),
            )
        except ContractViolation as exc:
            raise ConfigError(f"estimator: {exc}") from None
    if kind == "krr":
        _check_keys(
            cfg,
            ("kind", "kernel", "bandwidth", "lambda0", "q", "sigma", "p", "fixed_lambda"),
            "estimator",
        )
        try:
            return KrrSpec(
                kernel=_build_kernel(cfg, "estimator"),
                lambda0=cfg.get("lambda0", 1.0),
                q=cfg.get("q", 0.5),
                sigma=cfg.get("sigma", 1.0),
                p=cfg.get("p", 0.0),
                fixed_lambda=cfg.get("fixed_lambda"),
            )
        except ContractViolation as exc:
            raise ConfigError(f"estimator: {exc}") from None
    raise ConfigError(f"unknown estimator kind {kind!r}")


def _resolve_n_grid(cfg: dict):
    if "n_grid" in cfg:
        if not isinstance(cfg["n_grid"], list) or not cfg["n_grid"]:
            raise ConfigError("experiment.n_grid must be a nonempty list")
        return tuple(int(n) for n in cfg["n_grid"])
    lo = cfg.get("n_min", 10)
    hi = cfg.get("n_max", 100000)
    points = cfg.get("n_points", 9)
    if not (1 <= lo <= hi) or points < 1:
        raise ConfigError("need 1 <= n_min <= n_max and n_points >= 1")
    grid = np.unique(
        np.round(np.logspace(np.log10(lo), np.log10(hi), points)).astype(int)
    )
    return tuple(int(n) for n in grid)


def _resolve_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_rate_experiment(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, ("problem", "estimator", "experiment"), "top level")
    problem = _build_problem(cfg.get("problem", {}))
    estimator = _build_estimator(cfg.get("estimator", {}))
    exp = cfg.get("experiment", {})
    _check_keys(
        exp,
        ("n_grid", "n_min", "n_max", "n_points", "trials", "eval_grid_size",
         "master_seed", "slope_tolerance"),
        "experiment",
    )
    tolerance = exp.get("slope_tolerance", DEFAULT_SLOPE_TOLERANCE)
    seed = args.seed if args.seed is not None else exp.get("master_seed", 0)
    try:
        config = RateExperimentConfig(
            problem=problem,
            estimator=estimator,
            n_grid=_resolve_n_grid(exp),
            trials=exp.get("trials", 100),
            eval_grid_size=exp.get("eval_grid_size", 100),
            master_seed=int(seed),
            workers=_resolve_workers(args),
        )
    except ContractViolation as exc:
        raise ConfigError(f"experiment: {exc}") from None

    report = rate_experiment(config)

    out = _out_dir(args)
    write_report_json(report, out / "report.json", config)
    write_trials_csv(report, out / "trials.csv")
    write_summary_csv(report, out / "summary.csv")

    print(f"rate-experiment: {problem.kind} x {estimator.kind} "
          f"(seed {config.master_seed}, {config.trials} trials)")
    print(f"{'n':>8}  {'mean_excess_risk':>18}  {'stderr':>12}  {'zeros':>5}")
    for ni, n in enumerate(report.n_grid):
        print(f"{n:>8}  {report.mean[ni]:>18.6e}  {report.stderr[ni]:>12.3e}  "
              f"{report.zero_count[ni]:>5}")
    if report.fitted_slope is not None and report.theoretical_slope is not None:
        diff = abs(report.fitted_slope - report.theoretical_slope)
        verdict = "PASS" if diff <= tolerance else "FAIL"
        print(f"fitted slope {report.fitted_slope:+.3f} vs theory "
              f"{report.theoretical_slope:+.3f} "
              f"(|diff| {diff:.3f} <= {tolerance:g}): {verdict}")
    elif report.fitted_slope is not None:
        print(f"fitted slope {report.fitted_slope:+.3f} (no theoretical slope)")
    if report.regime_note:
        print(f"note: {report.regime_note}")
    print(f"reports written to {out}")
    return 0


def _cmd_margin_profile(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, ("problem", "profile", "fit"), "top level")
    problem = _build_problem(cfg.get("problem", {}))
    prof_cfg = cfg.get("profile", {})
    _check_keys(
        prof_cfg,
        ("eval_points", "mode", "seed", "thresholds", "t_min", "t_max"),
        "profile",
    )
    fit_cfg = cfg.get("fit", {})
    _check_keys(fit_cfg, ("drop_fraction", "window"), "fit")

    count = int(prof_cfg.get("eval_points", 100000))
    mode = prof_cfg.get("mode", "sample")
    if mode not in ("sample", "grid"):
        raise ConfigError("profile.mode must be 'sample' or 'grid'")
    seed = args.seed if args.seed is not None else prof_cfg.get("seed", 0)

    if mode == "grid":
        points = problem.eval_grid(count)
    else:
        points = problem.sample(count, int(seed)).inputs[:, 0]
    distances = problem.exact_frontier_distance(points)
    thresholds = default_thresholds(
        distances,
        count=int(prof_cfg.get("thresholds", 50)),
        t_min=float(prof_cfg.get("t_min", 1e-3)),
        t_max=prof_cfg.get("t_max"),
    )
    profile = margin_profile(problem, points, thresholds=thresholds)

    window = fit_cfg.get("window")
    try:
        fit = fit_alpha(
            profile,
            fit_range=None if window is None else (window[0], window[1]),
            drop=float(fit_cfg.get("drop_fraction", 0.1)),
        )
    except ProfileDegenerate:
        fit = None
    t0 = check_no_density(profile)

    out = _out_dir(args)
    save_profile_json(profile, out / "profile.json", fit=fit, t0=t0)
    save_profile_csv(profile, out / "profile.csv")

    print(f"margin-profile: {problem.kind}, {count} {mode} points")
    if fit is not None:
        print(f"alpha_hat {fit.alpha_hat:.4f}, c_alpha_hat {fit.c_alpha_hat:.4f}, "
              f"r2 {fit.r_squared:.4f}, window [{fit.fit_range[0]:.4g}, "
              f"{fit.fit_range[1]:.4g}]")
    else:
        print("profile degenerate: no low-density exponent to fit")
    if t0 is not None:
        print(f"no-density check: empirical t0 >= {t0:.6g}")
    print(f"reports written to {out}")
    return 0


def _cmd_simplex_inspect(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, ("inspect",), "top level")
    ins = cfg.get("inspect", {})
    _check_keys(ins, ("loss", "resolution"), "inspect")
    loss = three_class_loss() if "loss" not in ins else load_loss(ins["loss"])
    if loss.n_y != 3:
        raise ContractViolation("simplex-inspect needs a loss over 3 observation labels")
    resolution = int(ins.get("resolution", 20))
    if resolution < 1:
        raise ConfigError("inspect.resolution must be >= 1")

    mus = np.array(
        [
            (i / resolution, j / resolution, (resolution - i - j) / resolution)
            for i in range(resolution + 1)
            for j in range(resolution + 1 - i)
        ]
    )
    risks = mus @ loss.matrix.T
    idx = np.argmin(risks, axis=1)
    part = np.partition(risks, 1, axis=1)
    gaps = part[:, 1] - part[:, 0]
    dists = frontier_distances(loss, mus)

    out = _out_dir(args)
    path = out / "regions.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"mu_{y}" for y in loss.y_labels]
                   + ["decode", "margin_gap", "frontier_distance"])
        for row, zi, g, d in zip(mus, idx, gaps, dists):
            w.writerow([f"{v:.17g}" for v in row]
                       + [str(loss.z_labels[zi]), f"{g:.17g}", f"{d:.17g}"])

    counts = {str(z): int((idx == i).sum()) for i, z in enumerate(loss.z_labels)}
    on_frontier = int((gaps <= TIE_TOL).sum())
    print(f"simplex-inspect: {len(mus)} barycentric points at resolution {resolution}")
    print("decode counts: " + ", ".join(f"{z}: {c}" for z, c in counts.items()))
    print(f"frontier points (tied risks): {on_frontier}")
    print(f"table written to {path}")
    return 0


def _load_queries_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ContractViolation(f"{path}: expected a header row and data rows")
    header = [c.strip() for c in rows[0]]
    if not all(h == f"x_{i}" for i, h in enumerate(header)):
        raise ContractViolation(f"{path}: expected header x_0..x_{{d-1}}")
    return np.array([[float(c) for c in row] for row in rows[1:]])


def _cmd_predict(args) -> int:
    from .estimators import load_dataset_csv

    cfg = _load_config(args.config)
    _check_keys(cfg, ("predict", "estimator"), "top level")
    pred_cfg = cfg.get("predict", {})
    _check_keys(pred_cfg, ("loss", "dataset", "queries"), "predict")
    for key in ("loss", "dataset", "queries"):
        if key not in pred_cfg:
            raise ConfigError(f"predict.{key} is required")

    loss = load_loss(pred_cfg["loss"])
    data = load_dataset_csv(pred_cfg["dataset"], loss)
    queries = _load_queries_csv(pred_cfg["queries"])

    est_cfg = cfg.get("estimator", {})
    kind = est_cfg.get("kind", "knn")
    if kind == "knn":
        _check_keys(est_cfg, ("kind", "k", "k0", "beta"), "estimator")
        if "k" in est_cfg:
            k = int(est_cfg["k"])
        else:
            k = knn_schedule(data.n, est_cfg.get("k0", 1.0), est_cfg.get("beta", 1.0))
        weights = knn_weights_batch(queries, data, k)
    elif kind == "krr":
        _check_keys(
            est_cfg,
            ("kind", "kernel", "bandwidth", "lambda", "lambda0", "q", "sigma"),
            "estimator",
        )
        kernel = _build_kernel(est_cfg, "estimator")
        if "lambda" in est_cfg:
            lam = float(est_cfg["lambda"])
        else:
            lam = krr_schedule(
                data.n,
                est_cfg.get("lambda0", 1.0),
                est_cfg.get("q", 0.5),
                est_cfg.get("sigma", 1.0),
            )
        fact = krr_fit(data, kernel, lam)
        weights = krr_weights(queries, fact, data, kernel)
    else:
        raise ConfigError(f"unknown estimator kind {kind!r}")

    measures = predict_surrogate(weights, data, loss)
    idx = np.argmin(measures @ loss.matrix.T, axis=1)

    out = _out_dir(args)
    path = out / "predictions.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{i}" for i in range(queries.shape[1])] + ["prediction"])
        for q, zi in zip(queries, idx):
            w.writerow([f"{v:.17g}" for v in q] + [str(loss.z_labels[zi])])
    print(f"wrote {len(queries)} predictions to {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structrates",
        description="Convergence-rate experiments and margin diagnostics "
                    "for finite structured prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("rate-experiment", _cmd_rate_experiment,
         "run a Monte-Carlo excess-risk rate experiment"),
        ("margin-profile", _cmd_margin_profile,
         "estimate the margin cdf and low-density exponent"),
        ("simplex-inspect", _cmd_simplex_inspect,
         "tabulate decode regions over a 3-label simplex"),
        ("predict", _cmd_predict,
         "decode predictions for query points from a saved dataset"),
    )
    for name, func, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML or JSON configuration file")
        p.add_argument("--out", default="reports", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="trial concurrency (default: STRUCTRATES_WORKERS or cpu count)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the seed from the config file")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
