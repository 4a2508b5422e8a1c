"""Tests for covariances, the grouped ridge solver, and analytic oracles."""

from __future__ import annotations

import numpy as np
import pytest
from conftest import random_decay, random_problem_config

from opridge import (
    EmpiricalCovariances,
    LambdaMap,
    NoiseProfile,
    OperatorMatrix,
    ProblemConfig,
    SourceCoefficients,
    analytic_bias,
    bg_norm,
    bias_lambdas,
    effective_dimension,
    empirical_covariances,
    estimate_bias_contour,
    estimate_multilevel,
    estimate_single_ridge,
    estimate_variance_contour,
    fit_rowwise_ridge,
    lambda_floor,
    make_dataset,
    make_decay,
    multilevel_schedule,
    operator_from_source,
    population_regularized,
    prediction_error_metric,
    random_source_operator,
    sample_inputs,
    single_ridge_lambda,
    variance_lambdas,
)
from opridge.synth import SampleSet


def small_config(**overrides) -> ProblemConfig:
    fields = dict(
        p=0.5, q=0.5, alpha=0.5, beta=0.6, beta_prime=0.3, gamma=0.1, gamma_prime=0.7,
        B=1.0, sigma=0.1, c0=1.0, d_in=8, d_out=8, seed=3,
    )
    fields.update(overrides)
    return ProblemConfig(**fields)


def population_covariances(a0: OperatorMatrix) -> EmpiricalCovariances:
    """Infinite-sample covariances: c_kk = diag(mu), c_lk = m diag(mu)."""
    mu = a0.input_decay.values
    return EmpiricalCovariances(c_kk=np.diag(mu), c_lk=a0.m * mu[None, :], n=1)


class TestEmpiricalCovariances:
    def test_orthogonal_rows(self):
        data = SampleSet(u=np.eye(2), v=np.zeros((2, 2)), seed_used=0)
        cov = empirical_covariances(data)
        np.testing.assert_allclose(cov.c_kk, np.eye(2) / 2.0, rtol=1e-15)

    def test_constant_sample(self):
        u = np.ones((5, 1))
        v = 2.0 * np.ones((5, 1))
        cov = empirical_covariances(SampleSet(u=u, v=v, seed_used=0))
        assert cov.c_kk[0, 0] == pytest.approx(1.0, rel=1e-15)
        assert cov.c_lk[0, 0] == pytest.approx(2.0, rel=1e-15)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(5)
        data = SampleSet(
            u=rng.normal(size=(40, 7)), v=rng.normal(size=(40, 3)), seed_used=0
        )
        cov = empirical_covariances(data)
        assert np.array_equal(cov.c_kk, cov.c_kk.T), "symmetrization must be exact"

    def test_rejects_indefinite_matrix(self):
        with pytest.raises(ValueError, match="indefinite"):
            EmpiricalCovariances(
                c_kk=np.array([[1.0, 2.0], [2.0, 1.0]]),
                c_lk=np.zeros((1, 2)),
                n=1,
            )


class TestFitRowwiseRidge:
    def test_scalar_system(self):
        cov = EmpiricalCovariances(
            c_kk=np.array([[1.0]]), c_lk=np.array([[2.0]]), n=1
        )
        out = fit_rowwise_ridge(cov, LambdaMap.uniform(1, 1.0))
        assert out[0, 0] == pytest.approx(1.0, rel=1e-14)

    def test_tiny_lambda_approaches_unregularized_solution(self):
        rng = np.random.default_rng(7)
        g = rng.normal(size=(5, 5))
        c_kk = g @ g.T + np.eye(5)
        c_lk = rng.normal(size=(3, 5))
        cov = EmpiricalCovariances(c_kk=c_kk, c_lk=c_lk, n=1)
        out = fit_rowwise_ridge(cov, LambdaMap.uniform(3, 1e-12))
        want = c_lk @ np.linalg.inv(c_kk)
        np.testing.assert_allclose(out, want, rtol=1e-9, atol=1e-11)

    def test_diagonal_system(self):
        cov = EmpiricalCovariances(
            c_kk=np.diag([4.0, 1.0]), c_lk=np.array([[4.0, 1.0]]), n=1
        )
        out = fit_rowwise_ridge(cov, LambdaMap.uniform(1, 1.0))
        np.testing.assert_allclose(out, [[0.8, 0.5]], rtol=1e-14)

    def test_unlearned_rows_are_exactly_zero(self):
        rng = np.random.default_rng(9)
        cov = empirical_covariances(
            SampleSet(u=rng.normal(size=(20, 4)), v=rng.normal(size=(20, 6)), seed_used=0)
        )
        lmap = LambdaMap(
            lams=np.ones(6), learned=np.array([True, False, True, False, False, True])
        )
        out = fit_rowwise_ridge(cov, lmap)
        assert np.all(out[[1, 3, 4]] == 0.0)
        assert np.all(out[[0, 2, 5]] != 0.0)

    def test_solver_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            d_in, d_out = int(rng.integers(2, 20)), int(rng.integers(1, 20))
            u = rng.normal(size=(50, d_in))
            v = rng.normal(size=(50, d_out))
            cov = empirical_covariances(SampleSet(u=u, v=v, seed_used=0))
            lams = rng.uniform(0.01, 2.0, size=d_out)
            lmap = LambdaMap(lams=lams, learned=np.ones(d_out, dtype=bool))
            out = fit_rowwise_ridge(cov, lmap)
            for j in range(d_out):
                lhs = out[j] @ (cov.c_kk + lams[j] * np.eye(d_in))
                resid = np.linalg.norm(lhs - cov.c_lk[j]) / np.linalg.norm(cov.c_lk[j])
                assert resid <= 1e-10, f"row {j} residual {resid}"

    def test_row_count_mismatch_rejected(self):
        cov = EmpiricalCovariances(
            c_kk=np.eye(2), c_lk=np.zeros((3, 2)), n=1
        )
        with pytest.raises(ValueError):
            fit_rowwise_ridge(cov, LambdaMap.uniform(2, 1.0))

    def test_matches_population_oracle_on_population_covariances(self):
        rng = np.random.default_rng(13)
        for trial in range(20):
            d_in, d_out = int(rng.integers(1, 40)), int(rng.integers(1, 40))
            a0 = OperatorMatrix(
                m=rng.normal(size=(d_out, d_in)),
                input_decay=random_decay(rng, d_in),
                output_decay=random_decay(rng, d_out),
            )
            lams = rng.uniform(1e-4, 10.0, size=d_out)
            learned = rng.uniform(size=d_out) < 0.8
            lmap = LambdaMap(lams=lams, learned=learned)
            got = fit_rowwise_ridge(population_covariances(a0), lmap)
            want = population_regularized(a0, lmap).m
            err = np.abs(got - want).max()
            scale = max(np.abs(want).max(), 1e-300)
            assert err / scale <= 1e-10, f"trial {trial}: {err / scale}"


class TestEstimators:
    def test_multilevel_equals_grouped_ridge_bitwise(self):
        cfg = small_config(d_in=16, d_out=16)
        _, a0 = random_source_operator(cfg, rng_seed=21)
        data = make_dataset(a0, 200, NoiseProfile(sigma=cfg.sigma), rng_seed=22)
        est = estimate_multilevel(data, cfg)
        cov = empirical_covariances(data)
        sched = multilevel_schedule(cfg, data.n)
        want = fit_rowwise_ridge(cov, LambdaMap.from_level_schedule(sched, cfg.d_out))
        assert np.array_equal(est.m, want), "must be the same computation"

    def test_contour_estimators_learn_scheduled_rows_only(self):
        cfg = small_config(d_in=8, d_out=8)
        _, a0 = random_source_operator(cfg, rng_seed=23)
        data = make_dataset(a0, 64, NoiseProfile(sigma=cfg.sigma), rng_seed=24)
        for fit, sched_fn in (
            (estimate_variance_contour, variance_lambdas),
            (estimate_bias_contour, bias_lambdas),
        ):
            est = fit(data, cfg)
            y_max = sched_fn(cfg, data.n).y_max
            assert np.all(est.m[y_max:] == 0.0)
            assert np.all(np.any(est.m[:y_max] != 0.0, axis=1))

    def test_noiseless_recovery_with_tiny_lambda(self):
        cfg = small_config(d_in=8, d_out=8, sigma=0.0)
        _, a0 = random_source_operator(cfg, rng_seed=25)
        data = make_dataset(a0, 4096, NoiseProfile(sigma=0.0), rng_seed=26)
        est = estimate_single_ridge(data, cfg, lam=lambda_floor(cfg, data.n))
        err = bg_norm(est.difference(a0), cfg.beta_prime, cfg.gamma_prime)
        scale = bg_norm(a0, cfg.beta_prime, cfg.gamma_prime)
        assert err <= 1e-3 * scale, f"noiseless recovery error {err / scale}"

    def test_zero_outputs_give_zero_estimate(self):
        cfg = small_config()
        u = sample_inputs(32, cfg.input_decay, rng_seed=27)
        data = SampleSet(u=u, v=np.zeros((32, 8)), seed_used=0)
        est = estimate_single_ridge(data, cfg, lam=0.5)
        assert np.all(est.m == 0.0)

    def test_default_single_lambda_rule(self):
        cfg = small_config()
        assert single_ridge_lambda(cfg, 1024) == pytest.approx(
            1024.0 ** (-1.0 / 1.1), rel=1e-14
        )
        _, a0 = random_source_operator(cfg, rng_seed=29)
        data = make_dataset(a0, 100, NoiseProfile(sigma=0.1), rng_seed=30)
        default = estimate_single_ridge(data, cfg)
        explicit = estimate_single_ridge(data, cfg, lam=single_ridge_lambda(cfg, 100))
        assert np.array_equal(default.m, explicit.m)


class TestPopulationRegularized:
    def test_lambda_equal_mu_halves_entry(self):
        decay = make_decay(3, 0.5)
        a0 = OperatorMatrix(
            m=np.ones((2, 3)), input_decay=decay, output_decay=make_decay(2, 0.5)
        )
        lmap = LambdaMap(lams=np.array([decay.values[1], 1.0]),
                         learned=np.array([True, False]))
        out = population_regularized(a0, lmap)
        assert out.m[0, 1] == pytest.approx(0.5, rel=1e-14)
        assert np.all(out.m[1] == 0.0)

    def test_zero_lambda_keeps_learned_rows(self):
        a0 = OperatorMatrix(
            m=np.arange(6.0).reshape(2, 3),
            input_decay=make_decay(3, 0.5),
            output_decay=make_decay(2, 0.5),
        )
        lmap = LambdaMap(lams=np.full(2, 1e-300), learned=np.ones(2, dtype=bool))
        out = population_regularized(a0, lmap)
        np.testing.assert_allclose(out.m, a0.m, rtol=1e-12)

    def test_huge_lambda_kills_rows(self):
        a0 = OperatorMatrix(
            m=np.ones((2, 3)),
            input_decay=make_decay(3, 0.5),
            output_decay=make_decay(2, 0.5),
        )
        lmap = LambdaMap.uniform(2, 1e300)
        out = population_regularized(a0, lmap)
        assert np.abs(out.m).max() <= 1e-290

    def test_monotone_shrinkage(self):
        rng = np.random.default_rng(31)
        a0 = OperatorMatrix(
            m=rng.normal(size=(6, 5)),
            input_decay=random_decay(rng, 5),
            output_decay=random_decay(rng, 6),
        )
        lams = rng.uniform(0.1, 1.0, size=6)
        learned = np.ones(6, dtype=bool)
        small = population_regularized(a0, LambdaMap(lams=lams, learned=learned))
        big = population_regularized(a0, LambdaMap(lams=4.0 * lams, learned=learned))
        assert np.all(np.abs(big.m) <= np.abs(small.m) + 1e-15)


class TestAnalyticBias:
    def test_hand_value(self):
        # mu_1 = 0.25, rho_1 = 1, lambda = 0.25, beta step 0.8, gamma step
        # 0.8: bias^2 = 0.25 * 0.25^0.8 = 2^(-3.6).
        src = SourceCoefficients(a=np.array([[1.0]]), beta=0.9, gamma=0.1)
        ind = make_decay(1, 0.5)
        ind = type(ind)(values=np.array([0.25]), exponent=0.5)
        outd = type(ind)(values=np.array([1.0]), exponent=0.5)
        got = analytic_bias(src, LambdaMap.uniform(1, 0.25), ind, outd, 0.1, 0.9)
        assert got**2 == pytest.approx(2.0**-3.6, rel=1e-12)

    def test_zero_lambda_zero_bias(self):
        rng = np.random.default_rng(33)
        src = SourceCoefficients(a=rng.normal(size=(4, 3)), beta=0.6, gamma=0.1)
        lmap = LambdaMap(lams=np.full(4, 1e-300), learned=np.ones(4, dtype=bool))
        got = analytic_bias(src, lmap, make_decay(3, 0.5), make_decay(4, 0.5), 0.3, 0.7)
        assert got <= 1e-290

    def test_nothing_learned_gives_full_norm(self):
        rng = np.random.default_rng(35)
        src = SourceCoefficients(a=rng.normal(size=(4, 3)), beta=0.6, gamma=0.1)
        ind, outd = make_decay(3, 0.5), make_decay(4, 0.5)
        lmap = LambdaMap(lams=np.ones(4), learned=np.zeros(4, dtype=bool))
        a0 = operator_from_source(src, ind, outd)
        got = analytic_bias(src, lmap, ind, outd, 0.3, 0.7)
        assert got == pytest.approx(bg_norm(a0, 0.3, 0.7), rel=1e-12)

    def test_matches_population_norm_oracle(self):
        rng = np.random.default_rng(37)
        for trial in range(50):
            d_in, d_out = int(rng.integers(1, 65)), int(rng.integers(1, 65))
            beta = float(rng.uniform(0.1, 0.95))
            gamma = float(rng.uniform(0.0, 0.8))
            bp = float(rng.uniform(0.02, beta - 0.01))
            gp = float(rng.uniform(gamma + 0.01, 0.99))
            src = SourceCoefficients(a=rng.normal(size=(d_out, d_in)), beta=beta, gamma=gamma)
            ind, outd = random_decay(rng, d_in), random_decay(rng, d_out)
            a0 = operator_from_source(src, ind, outd)
            lmap = LambdaMap(
                lams=rng.uniform(1e-3, 5.0, size=d_out),
                learned=rng.uniform(size=d_out) < 0.7,
            )
            direct = bg_norm(population_regularized(a0, lmap).difference(a0), bp, gp)
            oracle = analytic_bias(src, lmap, ind, outd, bp, gp)
            assert oracle == pytest.approx(direct, rel=1e-10), f"trial {trial}"


class TestEffectiveDimension:
    def test_hand_value(self):
        assert effective_dimension(make_decay(3, 0.5), 1.0) == pytest.approx(
            0.8, rel=1e-14
        )

    def test_limits(self):
        decay = make_decay(10, 0.5)
        assert effective_dimension(decay, 1e12) <= 1e-10
        assert effective_dimension(decay, 1e-14) == pytest.approx(10.0, abs=1e-6)

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            effective_dimension(make_decay(3, 0.5), 0.0)


class TestPredictionErrorMetric:
    def test_perfect_estimate_scores_zero(self):
        cfg = small_config()
        _, a0 = random_source_operator(cfg, rng_seed=41)
        assert prediction_error_metric(a0, a0, cfg, 100, rng_seed=42) == 0.0

    def test_diagonal_error_matches_closed_form(self):
        cfg = small_config(d_in=4, d_out=4)
        zero = OperatorMatrix(
            m=np.zeros((4, 4)), input_decay=cfg.input_decay, output_decay=cfg.output_decay
        )
        err_m = np.diag([0.5, -0.3, 0.2, 0.1])
        a_hat = OperatorMatrix(
            m=err_m, input_decay=cfg.input_decay, output_decay=cfg.output_decay
        )
        n_mc = 200_000
        got = prediction_error_metric(a_hat, zero, cfg, n_mc, rng_seed=43)
        mu = cfg.input_decay.values
        w = cfg.output_decay.values ** (-(1.0 - cfg.gamma_prime))
        exact = float(np.sum(w[:, None] * mu[None, :] * err_m**2))
        # Single-coordinate uniform-squared terms have variance 0.8 mu^2 per
        # sample; three standard errors of the weighted sum.
        var_terms = w**2 * np.diag(err_m) ** 4 * mu**2 * 0.8
        se = float(np.sqrt(var_terms.sum() / n_mc))
        assert abs(got - exact) <= 3.0 * se, f"{got} vs {exact} (se {se})"

    def test_agrees_with_norm_on_population_average(self):
        cfg = small_config(d_in=6, d_out=6)
        rng = np.random.default_rng(47)
        _, a0 = random_source_operator(cfg, rng_seed=48)
        a_hat = OperatorMatrix(
            m=a0.m + 0.1 * rng.normal(size=a0.m.shape),
            input_decay=cfg.input_decay,
            output_decay=cfg.output_decay,
        )
        got = prediction_error_metric(a_hat, a0, cfg, 400_000, rng_seed=49)
        want = bg_norm(a_hat.difference(a0), 0.0, cfg.gamma_prime) ** 2
        assert got == pytest.approx(want, rel=0.05)
