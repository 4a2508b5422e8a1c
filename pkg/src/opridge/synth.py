"""Synthetic data generation: datasets v = A0 u + eps and ground truths.

Input coordinates are bounded uniforms scaled by sqrt(mu_i) so the
almost-sure embedding bound genuinely holds (Gaussians would violate it).
Noise coordinates follow the Basel-normalized law sigma_j^2 =
sigma^2 * (6/pi^2) * j^(-2), whose infinite sum is exactly sigma^2.

All draws are reproducible: every generator takes an explicit 64-bit seed,
and independent sub-streams are derived with derive_seed, a fixed
splitmix64-style integer mixer (Python's builtin hash is process-salted and
must not be used for this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    EigenDecay,
    OperatorMatrix,
    ProblemConfig,
    SourceCoefficients,
    make_decay,
    operator_from_source,
)

__all__ = [
    "SampleSet",
    "NoiseProfile",
    "derive_seed",
    "sample_inputs",
    "sample_noise",
    "make_dataset",
    "random_source_operator",
    "laplacian_operator",
    "packing_operator",
]

SQRT3 = math.sqrt(3.0)

# Fixed tags separating the independent sub-streams of one base seed.
_TAG_INPUTS = 0x1
_TAG_NOISE = 0x2
_TAG_GROUND_TRUTH = 0x3

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *parts: int) -> int:
    """Mix a base seed with integer labels into a decorrelated 64-bit seed.

    splitmix64 finalizer applied once per absorbed label. Pure integer
    arithmetic, stable across processes and platforms, so concurrently
    scheduled trials reproduce the exact draws of a serial run.
    """
    h = seed & _MASK64
    for part in parts:
        h ^= part & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        z = h
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        h = z ^ (z >> 31)
    return h


@dataclass(frozen=True)
class SampleSet:
    """A drawn dataset of N input/output coordinate rows.

    Attributes:
        u: N x D_in input coordinates in the input orthonormal basis.
        v: N x D_out output coordinates, v = u @ m.T + noise.
        seed_used: the seed the dataset was drawn from.
    """

    u: np.ndarray
    v: np.ndarray
    seed_used: int

    def __post_init__(self) -> None:
        if self.u.ndim != 2 or self.v.ndim != 2:
            raise ValueError("sample matrices must be 2-d")
        if self.u.shape[0] != self.v.shape[0]:
            raise ValueError(
                f"row counts differ: u has {self.u.shape[0]}, v has {self.v.shape[0]}"
            )
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValueError("sample matrices must be finite")

    @property
    def n(self) -> int:
        return int(self.u.shape[0])


@dataclass(frozen=True)
class NoiseProfile:
    """Per-coordinate noise variance law sigma_j^2 = sigma^2*(6/pi^2)*j^(-2).

    The Basel normalization makes the variances sum to exactly sigma^2 over
    an infinite output basis, so every truncation keeps the total noise trace
    at most sigma^2.
    """

    sigma: float
    kind: str = "polynomial"

    def __post_init__(self) -> None:
        if self.kind != "polynomial":
            raise ValueError(f"unknown noise profile kind {self.kind!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError(f"noise sigma must be nonnegative, got {self.sigma!r}")

    def variances(self, d_out: int) -> np.ndarray:
        """Truncated per-coordinate variances sigma_j^2 for j = 1..d_out."""
        j = np.arange(1, d_out + 1, dtype=np.float64)
        return (self.sigma**2) * (6.0 / math.pi**2) * j**-2.0


def sample_inputs(n: int, in_decay: EigenDecay, rng_seed: int) -> np.ndarray:
    """Draw N input coordinate rows u[k][i] = sqrt(mu_i) * xi.

    xi are i.i.d. uniform on [-sqrt(3), sqrt(3)]: mean zero, unit variance,
    and bounded, so |u[k][i]| <= sqrt(3 * mu_i) almost surely and the
    per-coordinate second moments converge to mu_i.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    xi = rng.uniform(-SQRT3, SQRT3, size=(n, len(in_decay)))
    return xi * np.sqrt(in_decay.values)[np.newaxis, :]


def sample_noise(
    n: int, out_decay: EigenDecay, profile: NoiseProfile, rng_seed: int
) -> np.ndarray:
    """Draw N noise rows eps[k][j] = sigma_j * eta, eta uniform on [-sqrt3, sqrt3]."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    eta = rng.uniform(-SQRT3, SQRT3, size=(n, len(out_decay)))
    return eta * np.sqrt(profile.variances(len(out_decay)))[np.newaxis, :]


def make_dataset(
    a0: OperatorMatrix, n: int, profile: NoiseProfile, rng_seed: int
) -> SampleSet:
    """Draw a dataset from the model v = A0 u + eps.

    Inputs and noise come from decorrelated sub-streams of rng_seed, so the
    noiseless part of a dataset is unchanged when sigma changes.
    """
    u = sample_inputs(n, a0.input_decay, derive_seed(rng_seed, _TAG_INPUTS))
    eps = sample_noise(
        n, a0.output_decay, profile, derive_seed(rng_seed, _TAG_NOISE)
    )
    v = u @ a0.m.T + eps
    return SampleSet(u=u, v=v, seed_used=rng_seed)


def random_source_operator(
    cfg: ProblemConfig,
    rng_seed: int,
    taper_in: float = 0.75,
    taper_out: float = 0.75,
) -> tuple[SourceCoefficients, OperatorMatrix]:
    """Draw a random ground truth with source norm exactly B.

    Coefficients are a[j][i] = sign * i^(-taper_in) * j^(-taper_out) with
    i.i.d. random signs, globally rescaled so the Frobenius norm equals
    cfg.B. The default tapers spread coefficient mass while keeping it
    summable; smaller tapers push the instance toward the boundary of the
    source class.

    Returns:
        (source coefficients, operator in orthonormal coordinates).
    """
    rng = np.random.default_rng(rng_seed)
    signs = rng.integers(0, 2, size=(cfg.d_out, cfg.d_in)) * 2.0 - 1.0
    w_in = np.arange(1, cfg.d_in + 1, dtype=np.float64) ** -taper_in
    w_out = np.arange(1, cfg.d_out + 1, dtype=np.float64) ** -taper_out
    a = signs * w_out[:, np.newaxis] * w_in[np.newaxis, :]
    norm = float(np.linalg.norm(a))
    if cfg.B > 0.0 and norm > 0.0:
        a = a * (cfg.B / norm)
    else:
        a = np.zeros_like(a)
    src = SourceCoefficients(a=a, beta=cfg.beta, gamma=cfg.gamma)
    in_decay = make_decay(cfg.d_in, cfg.p)
    out_decay = make_decay(cfg.d_out, cfg.q)
    return src, operator_from_source(src, in_decay, out_decay)


def laplacian_operator(
    s: float,
    m: float,
    t: int,
    dim: int,
    scale: float,
    beta: float,
    gamma: float,
) -> tuple[SourceCoefficients, OperatorMatrix, bool]:
    """Diagonal derivative-style demo operator on Matern-type decays.

    Builds mu_n = n^(-2s) and rho_n = n^(-2m), the diagonal operator with
    symbol d_n = scale * (pi*n)^(2t), and the equivalent source coefficients
    a_nn = d_n * mu_n^(-beta/2) * rho_n^(-(2-gamma)/2) for the requested
    source exponents.

    Args:
        s: input smoothness, > 0; the input decay exponent is 1/(2s).
        m: output smoothness, > 0.
        t: derivative order, integer >= 0.
        dim: truncation dimension (the operator is square).
        scale: symbol prefactor.
        beta, gamma: source exponents the coefficients are expressed for.

    Returns:
        (source coefficients, operator, finite_source) where finite_source
        reports whether the infinite-basis source norm would converge,
        decided by the closed-form condition (1-gamma)*m < (1-beta)*s - 1/2.
    """
    if s <= 0.0 or m <= 0.0:
        raise ValueError(f"smoothness orders must be positive, got s={s}, m={m}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if t < 0 or int(t) != t:
        raise ValueError(f"derivative order t must be a nonnegative integer, got {t}")
    n = np.arange(1, dim + 1, dtype=np.float64)
    in_decay = EigenDecay(values=n ** (-2.0 * s), exponent=1.0 / (2.0 * s))
    out_decay = EigenDecay(values=n ** (-2.0 * m), exponent=1.0 / (2.0 * m))
    d = scale * (math.pi * n) ** (2.0 * t)
    a_diag = (
        d
        * in_decay.values ** (-beta / 2.0)
        * out_decay.values ** (-(2.0 - gamma) / 2.0)
    )
    src = SourceCoefficients(a=np.diag(a_diag), beta=beta, gamma=gamma)
    op = operator_from_source(src, in_decay, out_decay)
    finite_source = (1.0 - gamma) * m < (1.0 - beta) * s - 0.5
    return src, op, finite_source


def packing_operator(
    m1: int,
    m2: int,
    K: int,
    eps: float,
    omega: np.ndarray,
    in_decay: EigenDecay,
    out_decay: EigenDecay,
    beta_prime: float,
    gamma_prime: float,
) -> OperatorMatrix:
    """Sign-pattern operator from the adversarial packing family.

    Places the block entry (1-based output row j+m2, input column i+m1)

        sqrt(32*eps/(m1*K)) * omega[i-1][j-1]
            * mu_{i+m1}^((beta_prime-1)/2) * rho_{j+m2}^((1-gamma_prime)/2)

    for i = 1..m1, j = 1..K and zero elsewhere. Any two members with sign
    patterns omega, omega' satisfy the exact separation identity
    bg_norm(A - A', beta_prime, gamma_prime)^2
        = (32*eps/(m1*K)) * sum (omega - omega')^2.

    Args:
        m1: input block width; the block occupies input columns m1+1..2*m1.
        m2: output row offset, >= 0; the block occupies rows m2+1..m2+K.
        K: output block height.
        eps: separation scale, > 0.
        omega: m1 x K matrix with entries in {0, 1}.
        in_decay, out_decay: eigenvalue decays fixing the grid.
        beta_prime, gamma_prime: the norm exponents the family is built for.

    Raises:
        ValueError: if the block does not fit the grid or omega is invalid.
    """
    if m1 < 1 or K < 1 or m2 < 0:
        raise ValueError(f"block sizes must satisfy m1>=1, K>=1, m2>=0, got {(m1, m2, K)}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (m1, K):
        raise ValueError(f"omega shape {omega.shape} must be (m1, K)=({m1}, {K})")
    if not np.all(np.isin(omega, (0.0, 1.0))):
        raise ValueError("omega entries must be 0 or 1")
    d_in, d_out = len(in_decay), len(out_decay)
    if 2 * m1 > d_in:
        raise ValueError(f"input block 2*m1={2 * m1} exceeds d_in={d_in}")
    if m2 + K > d_out:
        raise ValueError(f"output block m2+K={m2 + K} exceeds d_out={d_out}")
    c = math.sqrt(32.0 * eps / (m1 * K))
    mu_w = in_decay.values[m1 : 2 * m1] ** ((beta_prime - 1.0) / 2.0)
    rho_w = out_decay.values[m2 : m2 + K] ** ((1.0 - gamma_prime) / 2.0)
    mat = np.zeros((d_out, d_in))
    mat[m2 : m2 + K, m1 : 2 * m1] = c * omega.T * rho_w[:, np.newaxis] * mu_w[np.newaxis, :]
    return OperatorMatrix(mat, in_decay, out_decay)


def ground_truth_seed(cfg: ProblemConfig) -> int:
    """Sub-seed reserved for drawing the ground-truth operator of a config."""
    return derive_seed(cfg.seed, _TAG_GROUND_TRUTH)
