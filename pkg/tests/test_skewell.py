"""Skew-elliptical construction, densities, margins, sampling, profiles."""

import math

import numpy as np
import pytest
from scipy.stats import chisquare, multivariate_normal, norm
from scipy.special import ndtr, owens_t

from rapidtail.errors import (
    DomainError,
    InvalidDispersionError,
    InvalidSkewnessError,
    InvalidSpecError,
    ShapeError,
)
from rapidtail.generators import DensityGenerator, make_normal_generator
from rapidtail.logquad import log_quad, log_quad_real_line
from rapidtail.skewell import (
    SkewEllipticalSpec,
    build_spec,
    example31_spec,
    log_density,
    log_density_many,
    marginal_log_density,
    sample,
    tail_equivalence_profile,
)


def skew_margin_cdf(tb):
    return lambda v: ndtr(v) - 2.0 * owens_t(v, tb)


def user_tagged_normal(d):
    """A Gaussian generator labelled "user": identical law, but every
    consumer is forced down the generic numeric paths."""
    ref = make_normal_generator(d)
    return DensityGenerator(dim=d, log_g=ref.log_g, aux_m=ref.aux_m, family="user")


class TestBuildSpec:
    def test_kappa_equicorrelated(self):
        for rho in (-0.5, 0.0, 0.5, 0.9):
            spec = example31_spec(rho, (0.0, 0.0))
            assert spec.kappa_u == pytest.approx(2.0 / (1.0 + rho), abs=1e-12)

    def test_theta_zero_for_zero_delta(self):
        spec = example31_spec(0.3, (0.0, 0.0))
        assert np.all(spec.theta == 0.0)

    def test_theta_closed_form(self):
        spec = example31_spec(0.0, (0.6, 0.0))
        np.testing.assert_allclose(spec.theta, [0.75, 0.0], atol=1e-15)

    def test_rejects_non_pd_sigma(self):
        with pytest.raises(InvalidDispersionError):
            build_spec(
                [0.0, 0.0],
                [[1.0, 1.0], [1.0, 1.0]],
                [0.0, 0.0],
                make_normal_generator(3),
            )

    def test_rejects_non_unit_diagonal(self):
        with pytest.raises(InvalidDispersionError):
            build_spec(
                [0.0, 0.0],
                [[2.0, 0.0], [0.0, 2.0]],
                [0.0, 0.0],
                make_normal_generator(3),
            )

    def test_rejects_large_delta(self):
        with pytest.raises(InvalidSkewnessError):
            example31_spec(0.0, (1.0, 0.0))

    def test_rejects_inadmissible_delta_quadratic_form(self):
        # |delta_i| < 1 holds but delta Sigma^-1 delta^T = 16.2 >= 1
        with pytest.raises(InvalidSkewnessError):
            example31_spec(0.9, (0.9, -0.9))

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ShapeError):
            build_spec([0.0, 0.0], np.eye(2), [0.0, 0.0], make_normal_generator(2))
        with pytest.raises(ShapeError):
            build_spec([0.0, 0.0], np.eye(2), [0.0], make_normal_generator(3))

    def test_arrays_are_immutable(self):
        spec = example31_spec(0.2, (0.1, 0.1))
        with pytest.raises(ValueError):
            spec.sigma[0, 0] = 2.0


class TestLogDensity:
    def test_symmetric_origin(self):
        spec = example31_spec(0.0, (0.0, 0.0))
        assert log_density(spec, (0.0, 0.0)) == pytest.approx(
            -math.log(2.0 * math.pi), abs=1e-12
        )

    def test_skew_normal_product_oracle(self):
        spec = example31_spec(0.0, (0.6, 0.0))
        expected = math.log(2.0 * norm.pdf(1.0) * norm.pdf(0.0) * norm.cdf(0.75))
        assert log_density(spec, (1.0, 0.0)) == pytest.approx(expected, abs=1e-12)

    def test_zero_delta_reduces_to_elliptical(self):
        # 5x5 grid, against scipy's multivariate normal density
        spec = example31_spec(0.5, (0.0, 0.0))
        mvn = multivariate_normal(mean=[0.0, 0.0], cov=spec.sigma)
        grid = np.linspace(-2.0, 2.0, 5)
        for y1 in grid:
            for y2 in grid:
                assert log_density(spec, (y1, y2)) == pytest.approx(
                    mvn.logpdf([y1, y2]), abs=1e-10
                )

    def test_quadrature_path_matches_closed_form(self):
        spec = example31_spec(0.5, (0.6, 0.3))
        for y in [(0.0, 0.0), (1.5, -0.5), (-2.0, 3.0)]:
            closed = log_density(spec, y, method="closed")
            quad = log_density(spec, y, method="quadrature")
            assert quad == pytest.approx(closed, abs=1e-9)

    def test_density_normalizes(self):
        # iterated log-domain quadrature over the plane
        spec = example31_spec(0.5, (0.6, 0.3))

        def outer(y1s):
            y1s = np.atleast_1d(y1s)
            return np.array(
                [
                    log_quad_real_line(
                        lambda y2: log_density_many(
                            spec, np.column_stack([np.full(np.shape(y2), v), y2])
                        ),
                        rel_tol=1e-9,
                    )
                    for v in y1s
                ]
            )

        total = math.exp(log_quad_real_line(outer, rel_tol=1e-7))
        assert total == pytest.approx(1.0, abs=1e-4)

    def test_mu_shift(self):
        spec = example31_spec(0.0, (0.6, 0.0), mu=(1.0, -2.0))
        base = example31_spec(0.0, (0.6, 0.0))
        assert log_density(spec, (1.5, -1.0)) == pytest.approx(
            log_density(base, (0.5, 1.0)), abs=1e-13
        )


class TestMarginalLogDensity:
    def test_symmetric_value(self):
        spec = example31_spec(0.0, (0.0, 0.0))
        assert marginal_log_density(spec, 0, 0.0) == pytest.approx(
            math.log(norm.pdf(0.0)), abs=1e-12
        )

    def test_skew_closed_form(self):
        spec = example31_spec(0.0, (0.0, 1.0 / math.sqrt(2.0)))  # theta_bar_2 = 1
        expected = math.log(2.0 * norm.pdf(2.0) * norm.cdf(2.0))
        assert marginal_log_density(spec, 1, 2.0) == pytest.approx(expected, abs=1e-12)

    def test_quadrature_matches_closed_form(self):
        spec = example31_spec(0.0, (0.6, 0.0))  # theta_bar_1 = 0.75
        closed = marginal_log_density(spec, 0, 3.0, method="closed")
        quad = marginal_log_density(spec, 0, 3.0, method="quadrature")
        assert math.exp(quad - closed) == pytest.approx(1.0, rel=1e-7)

    def test_marginal_normalizes(self):
        spec = example31_spec(0.3, (0.6, 0.2))
        for i in range(2):
            total = math.exp(
                log_quad_real_line(
                    lambda s, i=i: np.array(
                        [marginal_log_density(spec, i, float(v)) for v in np.atleast_1d(s)]
                    ),
                    rel_tol=1e-9,
                )
            )
            assert total == pytest.approx(1.0, abs=1e-6)


class TestSample:
    def test_shape_and_determinism(self):
        spec = example31_spec(0.5, (0.6, 0.0))
        a = sample(spec, 1000, seed=5)
        b = sample(spec, 1000, seed=5)
        assert a.shape == (1000, 2)
        np.testing.assert_array_equal(a, b)
        c = sample(spec, 1000, seed=6)
        assert not np.array_equal(a, c)

    def test_acceptance_rate_is_binomial_half(self):
        spec = example31_spec(0.0, (0.6, 0.0))
        _, stats = sample(spec, 50_000, seed=11, return_stats=True)
        n = stats["proposals"]
        assert n >= 100_000
        rate = stats["accepted"] / n
        assert abs(rate - 0.5) < 3.0 * math.sqrt(0.25 / n)

    def test_symmetric_margins_have_zero_mean(self):
        spec = example31_spec(0.3, (0.0, 0.0))
        n = 40_000
        draws = sample(spec, n, seed=2)
        assert np.all(np.abs(draws.mean(axis=0)) < 4.0 / math.sqrt(n))

    def test_histogram_chi_square(self):
        # 50 bins on [-4, 4] against closed-form bin masses, fixed seed
        spec1 = build_spec([0.0], [[1.0]], [0.6], make_normal_generator(2))
        draws = sample(spec1, 100_000, seed=20240814)[:, 0]
        edges = np.linspace(-4.0, 4.0, 51)
        inside = draws[(draws >= -4.0) & (draws <= 4.0)]
        obs, _ = np.histogram(inside, bins=edges)
        cdf = skew_margin_cdf(float(spec1.theta_bar[0]))
        probs = np.diff([cdf(e) for e in edges])
        probs = probs / probs.sum()
        result = chisquare(obs, probs * len(inside))
        assert result.pvalue > 0.001

    def test_rejects_user_generator(self):
        spec = build_spec([0.0, 0.0], np.eye(2), [0.0, 0.0], user_tagged_normal(3))
        with pytest.raises(DomainError):
            sample(spec, 10, seed=0)

    def test_inconsistent_star_matrix_detected(self):
        # bypass build_spec validation to exercise the defensive check
        good = example31_spec(0.0, (0.0, 0.0))
        bad = SkewEllipticalSpec(
            mu=good.mu,
            sigma=good.sigma,
            delta=np.array([0.9, -0.9]),
            generator=good.generator,
            sigma_inv=good.sigma_inv,
            log_det_sigma=good.log_det_sigma,
            theta=good.theta,
            theta_bar=good.theta_bar,
            kappa_u=good.kappa_u,
        )
        with pytest.raises(InvalidSpecError):
            sample(bad, 10, seed=0)


class TestTailEquivalenceProfile:
    def test_table_cases(self):
        cases = [
            ((0.0, 0.0), "i", (1.0, 1.0)),
            ((0.6, 0.6), "i", (1.0, 1.0)),
            ((0.6, 0.0), "i", (1.0, 0.5)),
            ((0.0, 0.6), "i", (1.0, 2.0)),
        ]
        for delta, cond, a in cases:
            prof = tail_equivalence_profile(example31_spec(0.0, delta))
            assert prof.condition == cond
            np.testing.assert_allclose(prof.a, a, atol=1e-15)
            assert prof.a[0] == 1.0

    def test_equal_negative_slopes(self):
        prof = tail_equivalence_profile(example31_spec(0.0, (-0.3, -0.3)))
        assert prof.condition == "ii"
        np.testing.assert_allclose(prof.a, [1.0, 1.0], atol=0)

    def test_mixed_signs_not_equivalent(self):
        prof = tail_equivalence_profile(example31_spec(0.0, (0.3, -0.2)))
        assert prof.condition == "not-equivalent"
        assert prof.a is None
        assert not prof.is_equivalent

    def test_numeric_constants_for_user_generator(self):
        # same law expressed through the quadrature path: a_2 = 1/2 for
        # theta_bar = (positive, 0)
        spec = build_spec([0.0, 0.0], np.eye(2), [0.6, 0.0], user_tagged_normal(3))
        prof = tail_equivalence_profile(spec)
        assert prof.condition == "i"
        assert prof.a[1] == pytest.approx(0.5, abs=1e-3)
