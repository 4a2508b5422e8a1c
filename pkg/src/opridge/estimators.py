"""Row-wise ridge estimators over spectral coordinates, plus analytic oracles.

All estimators share one computational core: given empirical covariances
(c_kk, c_lk) and an assignment of a ridge coefficient to each learned output
row, row j of the estimate solves

    a_hat[j] @ (c_kk + lambda_j I) = c_lk[j]

and unlearned rows are exactly zero. Rows sharing a coefficient reuse a
single Cholesky factorization, so a schedule with k distinct coefficients
costs k factorizations regardless of how many rows it learns. Covariances
are uncentered and c_kk is symmetrized before factorization.

The population oracles (population_regularized, analytic_bias) evaluate the
infinite-sample limit of the same ridge in closed form; tests pit the solver
against them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import (
    EigenDecay,
    OperatorMatrix,
    ProblemConfig,
    SourceCoefficients,
)
from .schedules import (
    LambdaSchedule,
    LevelSchedule,
    bias_lambdas,
    multilevel_schedule,
    variance_lambdas,
)
from .synth import SampleSet, sample_inputs

__all__ = [
    "EmpiricalCovariances",
    "LambdaMap",
    "empirical_covariances",
    "fit_rowwise_ridge",
    "estimate_single_ridge",
    "estimate_variance_contour",
    "estimate_bias_contour",
    "estimate_multilevel",
    "single_ridge_lambda",
    "population_regularized",
    "analytic_bias",
    "effective_dimension",
    "prediction_error_metric",
]

# Tolerances for the covariance invariants; empirical Gram matrices are
# symmetric PSD up to accumulated rounding only.
_SYM_TOL = 1e-12
_EIG_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalCovariances:
    """Uncentered second moments of one sample set.

    Attributes:
        c_kk: input Gram matrix u.T @ u / n, symmetric PSD, shape
            (d_in, d_in).
        c_lk: cross matrix v.T @ u / n, shape (d_out, d_in).
        n: number of samples the moments were computed from.
    """

    c_kk: np.ndarray
    c_lk: np.ndarray
    n: int

    def __post_init__(self) -> None:
        c_kk = np.asarray(self.c_kk, dtype=np.float64)
        c_lk = np.asarray(self.c_lk, dtype=np.float64)
        if c_kk.ndim != 2 or c_kk.shape[0] != c_kk.shape[1]:
            raise ValueError(f"c_kk must be square, got shape {c_kk.shape}")
        if c_lk.ndim != 2 or c_lk.shape[1] != c_kk.shape[0]:
            raise ValueError(
                f"c_lk shape {c_lk.shape} does not match c_kk {c_kk.shape}"
            )
        if self.n < 1:
            raise ValueError(f"sample count must be >= 1, got {self.n}")
        asym = float(np.max(np.abs(c_kk - c_kk.T), initial=0.0))
        if asym > _SYM_TOL:
            raise ValueError(f"c_kk asymmetric by {asym:.3e}")
        eig_min = float(np.linalg.eigvalsh(c_kk).min())
        if eig_min < -_EIG_TOL:
            raise ValueError(f"c_kk indefinite, min eigenvalue {eig_min:.3e}")
        object.__setattr__(self, "c_kk", c_kk)
        object.__setattr__(self, "c_lk", c_lk)

    @property
    def d_in(self) -> int:
        return self.c_kk.shape[0]

    @property
    def d_out(self) -> int:
        return self.c_lk.shape[0]


def empirical_covariances(data: SampleSet) -> EmpiricalCovariances:
    """Compute uncentered covariances c_kk = u.T@u/n, c_lk = v.T@u/n."""
    n = data.n
    c_kk = data.u.T @ data.u / n
    c_kk = (c_kk + c_kk.T) / 2.0
    c_lk = data.v.T @ data.u / n
    return EmpiricalCovariances(c_kk=c_kk, c_lk=c_lk, n=n)


@dataclass(frozen=True)
class LambdaMap:
    """Assignment of a ridge coefficient to each learned output row.

    Attributes:
        lams: shape (d_out,); lams[j] is the coefficient of 0-based row j,
            meaningful only where learned[j] is True.
        learned: boolean mask of rows the estimator fits; unlearned rows of
            any estimate are exactly zero.
    """

    lams: np.ndarray
    learned: np.ndarray

    def __post_init__(self) -> None:
        lams = np.asarray(self.lams, dtype=np.float64)
        learned = np.asarray(self.learned, dtype=bool)
        if lams.ndim != 1 or learned.shape != lams.shape:
            raise ValueError("lams and learned must be 1-d of equal length")
        active = lams[learned]
        if active.size and (not np.all(np.isfinite(active)) or np.any(active <= 0.0)):
            raise ValueError("learned rows must have positive finite lambdas")
        object.__setattr__(self, "lams", lams)
        object.__setattr__(self, "learned", learned)

    @property
    def d_out(self) -> int:
        return self.lams.shape[0]

    @classmethod
    def uniform(cls, d_out: int, lam: float) -> "LambdaMap":
        """Every row learned with the same coefficient."""
        return cls(
            lams=np.full(d_out, float(lam)),
            learned=np.ones(d_out, dtype=bool),
        )

    @classmethod
    def from_lambda_schedule(cls, sched: LambdaSchedule, d_out: int) -> "LambdaMap":
        """Rows 1..y_max learned with the schedule's per-row coefficients."""
        if sched.y_max > d_out:
            raise ValueError(
                f"schedule learns {sched.y_max} rows but grid has {d_out}"
            )
        lams = np.ones(d_out)
        learned = np.zeros(d_out, dtype=bool)
        lams[: sched.y_max] = sched.lambdas
        learned[: sched.y_max] = True
        return cls(lams=lams, learned=learned)

    @classmethod
    def from_level_schedule(cls, sched: LevelSchedule, d_out: int) -> "LambdaMap":
        """Each level's row bracket learned with that level's coefficient."""
        lams = np.ones(d_out)
        learned = np.zeros(d_out, dtype=bool)
        for level in sched.levels:
            # Level brackets are 1-based half-open [row_start, row_end).
            lo, hi = level.row_start - 1, level.row_end - 1
            lams[lo:hi] = level.lam
            learned[lo:hi] = True
        return cls(lams=lams, learned=learned)


def fit_rowwise_ridge(cov: EmpiricalCovariances, lmap: LambdaMap) -> np.ndarray:
    """Solve the per-row ridge systems, one factorization per distinct lambda.

    Args:
        cov: empirical (or population) covariances.
        lmap: per-row coefficients; must cover cov.d_out rows.

    Returns:
        Matrix of shape (d_out, d_in); learned row j equals
        c_lk[j] @ (c_kk + lambda_j I)^(-1), unlearned rows are zero.

    Raises:
        ValueError: dimension mismatch.
        numpy.linalg.LinAlgError: factorization failure, which signals an
            indefinite c_kk.
    """
    if lmap.d_out != cov.d_out:
        raise ValueError(
            f"lambda map covers {lmap.d_out} rows, covariances have {cov.d_out}"
        )
    a_hat = np.zeros_like(cov.c_lk)
    eye = np.eye(cov.d_in)
    groups: dict[float, list[int]] = {}
    for j in range(lmap.d_out):
        if lmap.learned[j]:
            groups.setdefault(float(lmap.lams[j]), []).append(j)
    for lam, rows in groups.items():
        factor = cho_factor(cov.c_kk + lam * eye, lower=True)
        a_hat[rows] = cho_solve(factor, cov.c_lk[rows].T).T
    return a_hat


def single_ridge_lambda(cfg: ProblemConfig, n: int) -> float:
    """Baseline uniform coefficient n^(-1/(beta+p))."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    return float(n) ** (-1.0 / (cfg.beta + cfg.p))


def _wrap(cfg: ProblemConfig, a_hat: np.ndarray) -> OperatorMatrix:
    return OperatorMatrix(
        m=a_hat,
        input_decay=cfg.input_decay,
        output_decay=cfg.output_decay,
    )


ESTIMATOR_NAMES = ("single", "variance", "bias", "multilevel")


def estimate_from_covariances(
    cov: EmpiricalCovariances,
    cfg: ProblemConfig,
    estimator: str,
    lam: float | None = None,
) -> OperatorMatrix:
    """One ridge fit from precomputed covariances.

    The Gram matrices dominate the cost at large n, so callers fitting
    several estimators on one dataset should compute the covariances once
    and dispatch through here.

    Args:
        cov: empirical covariances of a dataset of cov.n samples.
        cfg: problem configuration supplying schedules and decays.
        estimator: one of "single" (uniform coefficient), "variance" /
            "bias" (per-row contour schedules), "multilevel" (staircase).
        lam: uniform coefficient override, only valid for "single";
            defaults to n^(-1/(beta+p)).
    """
    if lam is not None and estimator != "single":
        raise ValueError(f"lam override only applies to 'single', got {estimator!r}")
    if estimator == "single":
        if lam is None:
            lam = single_ridge_lambda(cfg, cov.n)
        lmap = LambdaMap.uniform(cov.d_out, lam)
    elif estimator == "variance":
        lmap = LambdaMap.from_lambda_schedule(variance_lambdas(cfg, cov.n), cov.d_out)
    elif estimator == "bias":
        lmap = LambdaMap.from_lambda_schedule(bias_lambdas(cfg, cov.n), cov.d_out)
    elif estimator == "multilevel":
        sched = multilevel_schedule(cfg, cov.n)
        lmap = LambdaMap.from_level_schedule(sched, cov.d_out)
    else:
        raise ValueError(f"unknown estimator {estimator!r}, expected one of {ESTIMATOR_NAMES}")
    return _wrap(cfg, fit_rowwise_ridge(cov, lmap))


def estimate_single_ridge(
    data: SampleSet, cfg: ProblemConfig, lam: float | None = None
) -> OperatorMatrix:
    """Uniform-lambda ridge over all output rows.

    Args:
        data: samples with d_in inputs and d_out outputs.
        cfg: problem configuration supplying the frequency decays.
        lam: ridge coefficient; defaults to n^(-1/(beta+p)).
    """
    return estimate_from_covariances(empirical_covariances(data), cfg, "single", lam)


def estimate_variance_contour(data: SampleSet, cfg: ProblemConfig) -> OperatorMatrix:
    """Ridge with per-row coefficients from the variance-equalizing contour."""
    return estimate_from_covariances(empirical_covariances(data), cfg, "variance")


def estimate_bias_contour(data: SampleSet, cfg: ProblemConfig) -> OperatorMatrix:
    """Ridge with per-row coefficients from the bias-equalizing contour."""
    return estimate_from_covariances(empirical_covariances(data), cfg, "bias")


def estimate_multilevel(data: SampleSet, cfg: ProblemConfig) -> OperatorMatrix:
    """Ridge with the piecewise-constant coefficients of the staircase."""
    return estimate_from_covariances(empirical_covariances(data), cfg, "multilevel")


def population_regularized(a0: OperatorMatrix, lmap: LambdaMap) -> OperatorMatrix:
    """Infinite-sample limit of the row-wise ridge applied to a0.

    Learned entry (j, i) equals (mu_i / (mu_i + lambda_j)) * a0[j, i];
    unlearned rows are zero.
    """
    if lmap.d_out != a0.d_out:
        raise ValueError(
            f"lambda map covers {lmap.d_out} rows, operator has {a0.d_out}"
        )
    mu = a0.input_decay.values
    shrink = np.zeros((a0.d_out, a0.d_in))
    rows = np.nonzero(lmap.learned)[0]
    if rows.size:
        lam_col = lmap.lams[rows, None]
        shrink[rows] = mu[None, :] / (mu[None, :] + lam_col)
    return OperatorMatrix(
        m=a0.m * shrink,
        input_decay=a0.input_decay,
        output_decay=a0.output_decay,
    )


def analytic_bias(
    src: SourceCoefficients,
    lmap: LambdaMap,
    in_decay: EigenDecay,
    out_decay: EigenDecay,
    beta_prime: float,
    gamma_prime: float,
) -> float:
    """Closed-form regularization bias of the row-wise ridge.

    Returns the (beta', gamma')-norm of the population ridge's deviation
    from the true operator:

        sqrt( sum_{j,i} mu_i^(beta-beta') * rho_j^(gamma'-gamma)
              * (lambda_j / (mu_i + lambda_j))^2 * a[j,i]^2 )

    where unlearned rows carry full weight (the lambda -> infinity limit).
    """
    a = src.a
    if lmap.d_out != a.shape[0]:
        raise ValueError(
            f"lambda map covers {lmap.d_out} rows, source has {a.shape[0]}"
        )
    if len(in_decay) != a.shape[1] or len(out_decay) != a.shape[0]:
        raise ValueError("decay lengths must match source dimensions")
    mu = in_decay.values
    rho = out_decay.values
    ratio = np.ones((a.shape[0], a.shape[1]))
    rows = np.nonzero(lmap.learned)[0]
    if rows.size:
        lam_col = lmap.lams[rows, None]
        ratio[rows] = lam_col / (mu[None, :] + lam_col)
    w_in = mu ** (src.beta - beta_prime)
    w_out = rho ** (gamma_prime - src.gamma)
    total = np.einsum("ji,i,j->", (ratio * a) ** 2, w_in, w_out)
    return float(np.sqrt(total))


def effective_dimension(decay: EigenDecay, lam: float) -> float:
    """Trace of mu (mu + lambda)^(-1) over the truncated spectrum."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    mu = decay.values
    return float(np.sum(mu / (mu + lam)))


def prediction_error_metric(
    a_hat: OperatorMatrix,
    a0: OperatorMatrix,
    cfg: ProblemConfig,
    n_mc: int,
    rng_seed: int,
) -> float:
    """Monte Carlo out-of-sample prediction error of an estimate.

    Draws n_mc fresh inputs, applies the error matrix a_hat - a0, and
    averages the squared output norm with coordinate j reweighted by
    rho_j^(-(1-gamma')). The population value of this average is
    bg_norm(a_hat - a0, 0, gamma')^2.

    Args:
        a_hat: estimate.
        a0: ground-truth operator on the same grid.
        cfg: problem configuration (supplies gamma' and the input law).
        n_mc: number of fresh inputs, >= 1.
        rng_seed: seed for the fresh draw.
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")
    err = a_hat.difference(a0)
    u = sample_inputs(n_mc, cfg.input_decay, rng_seed)
    r = u @ err.m.T
    w_out = err.output_decay.values ** (-(1.0 - cfg.gamma_prime))
    return float(np.mean((r**2) @ w_out))
