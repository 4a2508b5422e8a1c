"""Experiment orchestration: configs, trial grids, rate fits, persistence.

A convergence experiment is a grid of cells indexed by (sample count n,
trial). Every cell draws its dataset from a sub-seed derived only from
(config seed, n, trial), so the numbers are a pure function of the config
regardless of execution order or worker count. run_convergence always
executes cells in spawned worker processes -- even with one worker -- so
the parent interpreter never does cell arithmetic and the output bytes
cannot depend on how many workers were requested.

Error is always the squared (beta', gamma')-norm of (estimate - truth),
summarized across trials by median and interquartile range; the target
rates are high-probability statements, so medians, not means.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ConfigError,
    EigenDecay,
    OperatorMatrix,
    ProblemConfig,
    SourceCoefficients,
    bg_norm,
    bg_norm_via_embedding,
    make_decay,
    theoretical_rate,
)
from .estimators import (
    ESTIMATOR_NAMES,
    EmpiricalCovariances,
    LambdaMap,
    analytic_bias,
    empirical_covariances,
    estimate_from_covariances,
    fit_rowwise_ridge,
    population_regularized,
)
from .synth import (
    NoiseProfile,
    derive_seed,
    ground_truth_seed,
    laplacian_operator,
    make_dataset,
    packing_operator,
    random_source_operator,
)

__all__ = [
    "ExperimentPlan",
    "GroundTruthSpec",
    "RateFit",
    "RateReport",
    "RateSummary",
    "TrialRecord",
    "config_to_dict",
    "fit_rate",
    "load_config",
    "oracle_checks",
    "parse_config",
    "run_cell",
    "run_convergence",
    "run_trial",
    "write_report_json",
    "write_runs_csv",
    "write_summary_csv",
]

# Sub-seed stream tag for trial datasets; tags 1-3 belong to the synth module.
_TAG_TRIAL = 0x7

_GROUND_TRUTH_KINDS = ("random", "laplacian", "packing")

RUNS_HEADER = "estimator,n,trial,error_sq,elapsed_ms"
SUMMARY_HEADER = "estimator,n,median_error_sq,iqr_low,iqr_high"


# ---------------------------------------------------------------------------
# Ground truth construction


@dataclass(frozen=True)
class GroundTruthSpec:
    """Declarative description of the true operator of an experiment.

    kind "random" draws sign coefficients under polynomial tapers
    (params: taper_in, taper_out, seed), "laplacian" builds the diagonal
    derivative-style demo (params: t, scale; requires d_in == d_out),
    "packing" places a sign-pattern block (params: m1, m2, K, eps, and
    either an explicit 0/1 omega matrix or a seed to draw one).

    Parameters are validated on construction so that a bad config fails at
    load time, not in the middle of a sweep.
    """

    kind: str = "random"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _GROUND_TRUTH_KINDS:
            raise ConfigError(
                f"ground_truth.kind must be one of {_GROUND_TRUTH_KINDS}, got {self.kind!r}"
            )
        allowed = {
            "random": {"taper_in", "taper_out", "seed"},
            "laplacian": {"t", "scale"},
            "packing": {"m1", "m2", "K", "eps", "omega", "seed"},
        }[self.kind]
        unknown = set(self.params) - allowed
        if unknown:
            raise ConfigError(
                f"ground_truth.params for kind {self.kind!r} has unknown "
                f"key(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
            )

    def build(self, cfg: ProblemConfig) -> OperatorMatrix:
        """Materialize the operator on the config's frequency grid."""
        p = dict(self.params)
        try:
            if self.kind == "random":
                seed = int(p.get("seed", ground_truth_seed(cfg)))
                _, a0 = random_source_operator(
                    cfg,
                    seed,
                    taper_in=float(p.get("taper_in", 0.75)),
                    taper_out=float(p.get("taper_out", 0.75)),
                )
                return a0
            if self.kind == "laplacian":
                if cfg.d_in != cfg.d_out:
                    raise ConfigError(
                        "ground_truth.kind 'laplacian' needs a square grid, "
                        f"got d_in={cfg.d_in}, d_out={cfg.d_out}"
                    )
                # Smoothness orders are pinned by the config decays
                # (mu_i = i^(-1/p) means s = 1/(2p)), so only the symbol
                # is free here.
                _, op, _ = laplacian_operator(
                    s=1.0 / (2.0 * cfg.p),
                    m=1.0 / (2.0 * cfg.q),
                    t=int(p.get("t", 1)),
                    dim=cfg.d_in,
                    scale=float(p.get("scale", 1.0)),
                    beta=cfg.beta,
                    gamma=cfg.gamma,
                )
                return OperatorMatrix(op.m, cfg.input_decay, cfg.output_decay)
            m1 = int(p["m1"])
            k = int(p["K"])
            omega = p.get("omega")
            if omega is None:
                rng = np.random.default_rng(int(p.get("seed", ground_truth_seed(cfg))))
                omega = rng.integers(0, 2, size=(m1, k)).astype(np.float64)
            return packing_operator(
                m1=m1,
                m2=int(p.get("m2", 0)),
                K=k,
                eps=float(p["eps"]),
                omega=np.asarray(omega, dtype=np.float64),
                in_decay=cfg.input_decay,
                out_decay=cfg.output_decay,
                beta_prime=cfg.beta_prime,
                gamma_prime=cfg.gamma_prime,
            )
        except KeyError as exc:
            raise ConfigError(
                f"ground_truth.params for kind {self.kind!r} is missing key {exc.args[0]!r}"
            ) from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"ground_truth.params invalid: {exc}") from exc


# ---------------------------------------------------------------------------
# Plans and reports


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything a convergence sweep needs, validated up front.

    single_lambda_exponent overrides the baseline rule: the uniform
    coefficient becomes n^(-single_lambda_exponent) instead of the default
    n^(-1/(beta+p)). Output paths are optional; when set, run_convergence
    writes the corresponding artifacts after the sweep.
    """

    cfg: ProblemConfig
    n_list: tuple[int, ...]
    trials: int
    estimators: tuple[str, ...] = ESTIMATOR_NAMES
    ground_truth: GroundTruthSpec = field(default_factory=GroundTruthSpec)
    noise: NoiseProfile | None = None
    single_lambda_exponent: float | None = None
    workers: int = 1
    out_summary: str | None = None
    out_runs: str | None = None
    out_report: str | None = None

    def __post_init__(self) -> None:
        n_list = tuple(int(n) for n in self.n_list)
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not n_list or any(n < 1 for n in n_list):
            raise ConfigError(f"n_list must contain sample counts >= 1, got {n_list}")
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ConfigError(f"n_list must be strictly increasing, got {n_list}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.estimators:
            raise ConfigError("estimators must be a nonempty subset of "
                              f"{ESTIMATOR_NAMES}")
        bad = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if bad:
            raise ConfigError(f"unknown estimator(s) {bad}; valid: {ESTIMATOR_NAMES}")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError(f"estimators repeat: {self.estimators}")
        if self.single_lambda_exponent is not None and self.single_lambda_exponent <= 0:
            raise ConfigError(
                f"single_lambda_exponent must be positive, got {self.single_lambda_exponent}"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def noise_profile(self) -> NoiseProfile:
        return self.noise if self.noise is not None else NoiseProfile(sigma=self.cfg.sigma)

    def single_lambda_for(self, n: int) -> float | None:
        if self.single_lambda_exponent is None:
            return None
        return float(n) ** -self.single_lambda_exponent


@dataclass(frozen=True)
class TrialRecord:
    """One (estimator, n, trial) cell result."""

    estimator: str
    n: int
    trial: int
    error_sq: float
    elapsed_ms: float


@dataclass(frozen=True)
class RateSummary:
    """Across-trial error quartiles for one (estimator, n)."""

    estimator: str
    n: int
    median_error_sq: float
    iqr_low: float
    iqr_high: float


@dataclass(frozen=True)
class RateFit:
    """Least-squares power law of one estimator's median errors."""

    estimator: str
    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValueError(
                f"degenerate rate fit for {self.estimator!r}: "
                f"slope={self.slope}, intercept={self.intercept}"
            )


@dataclass(frozen=True)
class RateReport:
    """Full outcome of a convergence sweep.

    theoretical_eta1 is the predicted squared-error decay exponent; the
    empirical counterpart of -eta1 is each fit's slope. total_seconds is
    wall time for the whole grid and is the only non-deterministic field
    besides the per-record timings.
    """

    runs: tuple[TrialRecord, ...]
    summaries: tuple[RateSummary, ...]
    fits: tuple[RateFit, ...]
    theoretical_eta1: float
    total_seconds: float

    def fit_for(self, estimator: str) -> RateFit:
        for f in self.fits:
            if f.estimator == estimator:
                return f
        raise KeyError(f"no fit for estimator {estimator!r}")

    def summary_for(self, estimator: str, n: int) -> RateSummary:
        for s in self.summaries:
            if s.estimator == estimator and s.n == n:
                return s
        raise KeyError(f"no summary for ({estimator!r}, n={n})")


# ---------------------------------------------------------------------------
# Single cells


def run_cell(
    cfg: ProblemConfig,
    a0: OperatorMatrix,
    n: int,
    trial_index: int,
    estimators: Sequence[str],
    noise: NoiseProfile | None = None,
    single_lambda: float | None = None,
) -> tuple[TrialRecord, ...]:
    """Fit every requested estimator on one freshly drawn dataset.

    The dataset and its covariances are computed once and shared, so each
    record's elapsed_ms charges the shared preparation plus that
    estimator's own solve; timings approximate standalone run_trial costs
    while the whole cell stays cheap.
    """
    if noise is None:
        noise = NoiseProfile(sigma=cfg.sigma)
    t0 = time.perf_counter()
    data = make_dataset(a0, n, noise, derive_seed(cfg.seed, _TAG_TRIAL, n, trial_index))
    cov = empirical_covariances(data)
    prep = time.perf_counter() - t0
    records = []
    for name in estimators:
        t1 = time.perf_counter()
        lam = single_lambda if name == "single" else None
        a_hat = estimate_from_covariances(cov, cfg, name, lam=lam)
        err = bg_norm(a_hat.difference(a0), cfg.beta_prime, cfg.gamma_prime) ** 2
        elapsed = prep + time.perf_counter() - t1
        records.append(TrialRecord(name, int(n), int(trial_index), float(err), elapsed * 1e3))
    return tuple(records)


def run_trial(
    cfg: ProblemConfig,
    a0: OperatorMatrix,
    n: int,
    trial_index: int,
    estimator: str,
    noise: NoiseProfile | None = None,
    single_lambda: float | None = None,
) -> tuple[float, float]:
    """One estimator on one dataset: (squared error, elapsed seconds).

    The dataset sub-seed depends only on (cfg.seed, n, trial_index), so a
    repeated call reproduces the error bit for bit and different trials
    use decorrelated streams.
    """
    rec = run_cell(cfg, a0, n, trial_index, (estimator,), noise, single_lambda)[0]
    return rec.error_sq, rec.elapsed_ms / 1e3


# ---------------------------------------------------------------------------
# Rate fitting


def fit_rate(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least squares of ln(err_sq) on ln(n).

    Args:
        points: at least three (n, err_sq) pairs, all positive.

    Returns:
        (slope, intercept, r_squared). A constant sequence has zero
        residuals around its horizontal fit, so r_squared is 1.0 there.

    Raises:
        ValueError: fewer than 3 points, nonpositive values, or all n equal.
    """
    if len(points) < 3:
        raise ValueError(f"rate fit needs >= 3 points, got {len(points)}")
    ns = np.asarray([p[0] for p in points], dtype=np.float64)
    errs = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.any(ns <= 0.0) or np.any(errs <= 0.0):
        raise ValueError("rate fit needs positive sample counts and errors")
    x = np.log(ns)
    if float(np.ptp(x)) == 0.0:
        raise ValueError("rate fit is degenerate: all sample counts equal")
    y = np.log(errs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_sq = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), float(r_sq)


# ---------------------------------------------------------------------------
# The sweep

_WORKER_STATE: dict[str, Any] = {}


def _pool_init(cfg: ProblemConfig, a0: OperatorMatrix, noise: NoiseProfile,
               estimators: tuple[str, ...], exponent: float | None) -> None:
    _WORKER_STATE["args"] = (cfg, a0, noise, estimators, exponent)


def _pool_cell(task: tuple[int, int]) -> tuple[TrialRecord, ...]:
    n, trial = task
    cfg, a0, noise, estimators, exponent = _WORKER_STATE["args"]
    lam = None if exponent is None else float(n) ** -exponent
    return run_cell(cfg, a0, n, trial, estimators, noise, lam)


def run_convergence(plan: ExperimentPlan) -> RateReport:
    """Execute the full (estimator, n, trial) grid and fit the rates.

    Cells always run inside spawned worker processes with BLAS threading
    defaulted to one thread, so the floating-point environment -- and
    therefore every error value -- is identical for any worker count.
    Results are assembled in a fixed order independent of scheduling.
    """
    if len(plan.n_list) < 3:
        raise ValueError(
            f"rate fitting needs at least 3 sample counts, got {len(plan.n_list)}"
        )
    t0 = time.perf_counter()
    a0 = plan.ground_truth.build(plan.cfg)
    noise = plan.noise_profile
    tasks = [(n, t) for n in plan.n_list for t in range(plan.trials)]

    # Children read BLAS thread env at import; set-before-spawn pins them
    # without touching the already-initialized parent.
    thread_vars = ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                   "OMP_NUM_THREADS", "NUMEXPR_NUM_THREADS")
    saved = {v: os.environ.get(v) for v in thread_vars}
    for v in thread_vars:
        os.environ.setdefault(v, "1")
    try:
        with ProcessPoolExecutor(
            max_workers=plan.workers,
            mp_context=get_context("spawn"),
            initializer=_pool_init,
            initargs=(plan.cfg, a0, noise, plan.estimators,
                      plan.single_lambda_exponent),
        ) as pool:
            cell_results = list(pool.map(_pool_cell, tasks, chunksize=1))
    finally:
        for v, old in saved.items():
            if old is None:
                os.environ.pop(v, None)
            else:
                os.environ[v] = old

    by_cell = dict(zip(tasks, cell_results))
    runs = tuple(
        rec
        for name in plan.estimators
        for n in plan.n_list
        for t in range(plan.trials)
        for rec in by_cell[(n, t)]
        if rec.estimator == name
    )

    summaries = []
    for name in plan.estimators:
        for n in plan.n_list:
            errs = [r.error_sq for r in runs if r.estimator == name and r.n == n]
            q1, q2, q3 = np.percentile(np.asarray(errs), [25.0, 50.0, 75.0])
            summaries.append(RateSummary(name, n, float(q2), float(q1), float(q3)))

    fits = []
    for name in plan.estimators:
        pts = [(s.n, s.median_error_sq) for s in summaries if s.estimator == name]
        slope, intercept, r_sq = fit_rate(pts)
        fits.append(RateFit(name, slope, intercept, r_sq))

    report = RateReport(
        runs=runs,
        summaries=tuple(summaries),
        fits=tuple(fits),
        theoretical_eta1=theoretical_rate(plan.cfg)[0],
        total_seconds=time.perf_counter() - t0,
    )
    if plan.out_summary:
        write_summary_csv(report, plan.out_summary)
    if plan.out_runs:
        write_runs_csv(report, plan.out_runs)
    if plan.out_report:
        write_report_json(report, plan.out_report, cfg=plan.cfg)
    return report


# ---------------------------------------------------------------------------
# Config files


_SCALAR_FIELDS: tuple[tuple[str, type], ...] = (
    ("p", float), ("q", float), ("alpha", float), ("beta", float),
    ("beta_prime", float), ("gamma", float), ("gamma_prime", float),
    ("B", float), ("sigma", float), ("c0", float),
    ("d_in", int), ("d_out", int), ("seed", int),
)
_OPTIONAL_KEYS = ("ground_truth", "noise", "n_list", "trials")


def parse_config(obj: Any) -> tuple[ProblemConfig, GroundTruthSpec, NoiseProfile, dict[str, Any]]:
    """Validate a decoded config object.

    Returns:
        (cfg, ground_truth, noise, extras) where extras carries the
        optional "n_list" and "trials" entries when present.

    Raises:
        ConfigError: naming the offending field, on any schema violation.
    """
    if not isinstance(obj, dict):
        raise ConfigError(f"config must be a JSON object, got {type(obj).__name__}")
    known = {name for name, _ in _SCALAR_FIELDS} | set(_OPTIONAL_KEYS)
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")

    values: dict[str, Any] = {}
    for name, want in _SCALAR_FIELDS:
        if name not in obj:
            raise ConfigError(f"config is missing required field {name!r}")
        v = obj[name]
        # bool is an int subclass; a config saying "beta": true is a mistake.
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"field {name!r} must be a number, got {v!r}")
        if want is int and int(v) != v:
            raise ConfigError(f"field {name!r} must be an integer, got {v!r}")
        values[name] = want(v)
    cfg = ProblemConfig(**values)

    gt_obj = obj.get("ground_truth", {"kind": "random", "params": {}})
    if not isinstance(gt_obj, dict):
        raise ConfigError(f"field 'ground_truth' must be an object, got {gt_obj!r}")
    unknown = set(gt_obj) - {"kind", "params"}
    if unknown:
        raise ConfigError(f"unknown ground_truth key(s): {sorted(unknown)}")
    params = gt_obj.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"field 'ground_truth.params' must be an object, got {params!r}")
    ground_truth = GroundTruthSpec(kind=gt_obj.get("kind", "random"), params=params)

    noise_obj = obj.get("noise", {})
    if not isinstance(noise_obj, dict):
        raise ConfigError(f"field 'noise' must be an object, got {noise_obj!r}")
    unknown = set(noise_obj) - {"sigma", "profile"}
    if unknown:
        raise ConfigError(f"unknown noise key(s): {sorted(unknown)}")
    n_sigma = noise_obj.get("sigma", cfg.sigma)
    if isinstance(n_sigma, bool) or not isinstance(n_sigma, (int, float)):
        raise ConfigError(f"field 'noise.sigma' must be a number, got {n_sigma!r}")
    try:
        noise = NoiseProfile(sigma=float(n_sigma), kind=noise_obj.get("profile", "polynomial"))
    except ValueError as exc:
        raise ConfigError(f"field 'noise.profile' invalid: {exc}") from exc

    extras: dict[str, Any] = {}
    if "n_list" in obj:
        n_list = obj["n_list"]
        if (not isinstance(n_list, list) or not n_list
                or any(isinstance(n, bool) or not isinstance(n, int) for n in n_list)):
            raise ConfigError(f"field 'n_list' must be a list of integers, got {n_list!r}")
        extras["n_list"] = [int(n) for n in n_list]
    if "trials" in obj:
        trials = obj["trials"]
        if isinstance(trials, bool) or not isinstance(trials, int):
            raise ConfigError(f"field 'trials' must be an integer, got {trials!r}")
        extras["trials"] = int(trials)
    return cfg, ground_truth, noise, extras


def load_config(path: str | Path) -> tuple[ProblemConfig, GroundTruthSpec, NoiseProfile, dict[str, Any]]:
    """Read and validate a JSON config file; see parse_config."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
    return parse_config(obj)


def config_to_dict(
    cfg: ProblemConfig,
    ground_truth: GroundTruthSpec | None = None,
    noise: NoiseProfile | None = None,
    n_list: Sequence[int] | None = None,
    trials: int | None = None,
) -> dict[str, Any]:
    """Config file content for the given pieces, ready for json.dump."""
    out: dict[str, Any] = {name: getattr(cfg, name) for name, _ in _SCALAR_FIELDS}
    if ground_truth is not None:
        out["ground_truth"] = {"kind": ground_truth.kind, "params": dict(ground_truth.params)}
    if noise is not None:
        out["noise"] = {"sigma": noise.sigma, "profile": noise.kind}
    if n_list is not None:
        out["n_list"] = [int(n) for n in n_list]
    if trials is not None:
        out["trials"] = int(trials)
    return out


# ---------------------------------------------------------------------------
# Persistence


def format_number(v: float | int) -> str:
    """Integer-valued numbers print bare, others as shortest round trip."""
    f = float(v)
    if f.is_integer() and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


def _write_lines(path: str | Path, lines: Iterable[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n")


def write_runs_csv(report: RateReport, path: str | Path) -> None:
    """Per-trial rows; wall times make this file non-reproducible."""
    lines = [RUNS_HEADER]
    for r in report.runs:
        lines.append(
            f"{r.estimator},{r.n},{r.trial},{format_number(r.error_sq)},"
            f"{format_number(round(r.elapsed_ms, 3))}"
        )
    _write_lines(path, lines)


def write_summary_csv(report: RateReport, path: str | Path) -> None:
    """Median/IQR rows; byte-reproducible for a given config and seed."""
    lines = [SUMMARY_HEADER]
    for s in report.summaries:
        lines.append(
            f"{s.estimator},{s.n},{format_number(s.median_error_sq)},"
            f"{format_number(s.iqr_low)},{format_number(s.iqr_high)}"
        )
    _write_lines(path, lines)


def write_report_json(
    report: RateReport, path: str | Path, cfg: ProblemConfig | None = None
) -> None:
    """Full report (fits, summaries, theory target, timings) as JSON."""
    eta1, eta2, u = (None, None, None)
    if cfg is not None:
        eta1, eta2, u = theoretical_rate(cfg)
    doc: dict[str, Any] = {
        "theoretical_eta1": report.theoretical_eta1,
        "slope_target": -report.theoretical_eta1,
        "theoretical": None if cfg is None else {"eta1": eta1, "eta2": eta2, "u": u},
        "fits": {
            f.estimator: {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared}
            for f in report.fits
        },
        "summaries": [
            {"estimator": s.estimator, "n": s.n, "median_error_sq": s.median_error_sq,
             "iqr_low": s.iqr_low, "iqr_high": s.iqr_high}
            for s in report.summaries
        ],
        "total_seconds": report.total_seconds,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Analytic self-checks (shared by the CLI oracle-check subcommand and the
# acceptance suite)


def _random_small_instance(rng: np.random.Generator) -> tuple[
    SourceCoefficients, EigenDecay, EigenDecay, LambdaMap, float, float
]:
    d_in = int(rng.integers(2, 65))
    d_out = int(rng.integers(2, 65))
    in_decay = make_decay(d_in, float(rng.uniform(0.2, 0.9)))
    out_decay = make_decay(d_out, float(rng.uniform(0.2, 0.9)))
    beta = float(rng.uniform(0.2, 0.9))
    gamma = float(rng.uniform(0.0, 0.6))
    beta_prime = float(rng.uniform(0.05, 0.9)) * beta
    gamma_prime = float(rng.uniform(gamma + 0.05, 0.97))
    src = SourceCoefficients(
        a=rng.standard_normal((d_out, d_in)), beta=beta, gamma=gamma
    )
    lams = 10.0 ** rng.uniform(-6.0, 0.0, size=d_out)
    learned = rng.random(d_out) < 0.8
    lmap = LambdaMap(lams=lams, learned=learned)
    return src, in_decay, out_decay, lmap, beta_prime, gamma_prime


def oracle_checks(seed: int = 20260819) -> list[tuple[str, bool, str]]:
    """Run every closed-form oracle suite and report (name, passed, detail).

    Suites: analytic regularization bias vs direct norm of the population
    ridge's deviation (50 instances, 1e-10 relative); the row-wise solver
    on population covariances vs the closed-form population ridge (20
    instances, 1e-10); weighted-norm equality with the embedding-based
    evaluation (100 instances, 1e-12); packing-family separation identity
    (50 pairs, 1e-12).
    """
    from .core import operator_from_source  # local to avoid a wide import list above

    results: list[tuple[str, bool, str]] = []
    rng = np.random.default_rng(derive_seed(seed, 0xA))
    worst = 0.0
    for _ in range(50):
        src, in_d, out_d, lmap, bp, gp = _random_small_instance(rng)
        a0 = operator_from_source(src, in_d, out_d)
        direct = bg_norm(population_regularized(a0, lmap).difference(a0), bp, gp)
        closed = analytic_bias(src, lmap, in_d, out_d, bp, gp)
        worst = max(worst, abs(closed - direct) / max(direct, 1e-300))
    results.append(("bias-oracle", worst <= 1e-10, f"max relative deviation {worst:.3e}"))

    rng = np.random.default_rng(derive_seed(seed, 0xB))
    worst = 0.0
    for _ in range(20):
        src, in_d, out_d, lmap, _, _ = _random_small_instance(rng)
        a0 = operator_from_source(src, in_d, out_d)
        cov = EmpiricalCovariances(
            c_kk=np.diag(in_d.values), c_lk=a0.m * in_d.values[np.newaxis, :], n=1
        )
        solved = fit_rowwise_ridge(cov, lmap)
        target = population_regularized(a0, lmap).m
        scale = max(float(np.max(np.abs(target))), 1e-300)
        worst = max(worst, float(np.max(np.abs(solved - target))) / scale)
    results.append(("population-ridge", worst <= 1e-10, f"max relative deviation {worst:.3e}"))

    rng = np.random.default_rng(derive_seed(seed, 0xC))
    worst = 0.0
    for _ in range(100):
        d_in = int(rng.integers(2, 33))
        d_out = int(rng.integers(2, 33))
        op = OperatorMatrix(
            rng.standard_normal((d_out, d_in)),
            make_decay(d_in, float(rng.uniform(0.2, 0.9))),
            make_decay(d_out, float(rng.uniform(0.2, 0.9))),
        )
        b = float(rng.uniform(0.0, 1.0))
        g = float(rng.uniform(0.0, 1.0))
        direct = bg_norm(op, b, g)
        emb = bg_norm_via_embedding(op, b, g)
        worst = max(worst, abs(direct - emb) / max(direct, 1e-300))
    results.append(("norm-equivalence", worst <= 1e-12, f"max relative deviation {worst:.3e}"))

    rng = np.random.default_rng(derive_seed(seed, 0xD))
    worst = 0.0
    for _ in range(50):
        m1 = int(rng.integers(1, 9))
        k = int(rng.integers(1, 9))
        m2 = int(rng.integers(0, 5))
        d_in = 2 * m1 + int(rng.integers(0, 4))
        d_out = m2 + k + int(rng.integers(0, 4))
        in_d = make_decay(d_in, float(rng.uniform(0.2, 0.9)))
        out_d = make_decay(d_out, float(rng.uniform(0.2, 0.9)))
        bp = float(rng.uniform(0.05, 0.9))
        gp = float(rng.uniform(0.05, 0.97))
        eps = float(10.0 ** rng.uniform(-4.0, 0.0))
        om1 = rng.integers(0, 2, size=(m1, k)).astype(np.float64)
        om2 = rng.integers(0, 2, size=(m1, k)).astype(np.float64)
        a = packing_operator(m1, m2, k, eps, om1, in_d, out_d, bp, gp)
        b_ = packing_operator(m1, m2, k, eps, om2, in_d, out_d, bp, gp)
        lhs = bg_norm(a.difference(b_), bp, gp) ** 2
        rhs = (32.0 * eps / (m1 * k)) * float(np.sum((om1 - om2) ** 2))
        if rhs == 0.0:
            worst = max(worst, abs(lhs))
        else:
            worst = max(worst, abs(lhs - rhs) / rhs)
    results.append(("packing-separation", worst <= 1e-12, f"max relative deviation {worst:.3e}"))
    return results
