"""Shared helpers: random valid configurations for property tests."""

from __future__ import annotations

import numpy as np

from opridge import EigenDecay, ProblemConfig


def random_problem_config(rng: np.random.Generator, **overrides) -> ProblemConfig:
    """Draw a valid ProblemConfig, fields overridable."""
    beta = float(rng.uniform(0.2, 0.9))
    gamma = float(rng.uniform(0.0, 0.6))
    fields = {
        "p": float(rng.uniform(0.2, 0.8)),
        "q": float(rng.uniform(0.2, 0.8)),
        "alpha": float(rng.uniform(0.2, 0.8)),
        "beta": beta,
        "beta_prime": float(rng.uniform(0.05 * beta, 0.8 * beta)),
        "gamma": gamma,
        "gamma_prime": float(rng.uniform(gamma + 0.05, 0.97)),
        "B": 1.0,
        "sigma": 0.1,
        "c0": 1.0,
        "d_in": 16,
        "d_out": 16,
        "seed": int(rng.integers(0, 2**32)),
    }
    fields.update(overrides)
    return ProblemConfig(**fields)


def random_decay(rng: np.random.Generator, dim: int) -> EigenDecay:
    """Strictly decreasing positive values with a plausible exponent tag."""
    exponent = float(rng.uniform(0.2, 0.8))
    base = np.sort(rng.uniform(0.05, 2.0, size=dim))[::-1]
    # Enforce strict decrease even under unlucky ties.
    values = base * np.exp(-1e-6 * np.arange(dim))
    return EigenDecay(values=values, exponent=exponent)
