"""Marginal survival functions, reciprocal hazard, scaling pair, quantiles."""

import math

import numpy as np
import pytest
from scipy.special import log_ndtr, ndtri

from rapidtail.errors import DomainError, NotTailEquivalentError, QuantileRangeError
from rapidtail.generators import (
    gamma_class_ratio,
    make_normal_generator,
    reduce_dimension,
    self_neglecting_defect,
)
from rapidtail.logquad import log_quad_lower, log_quad_upper
from rapidtail.normal import mills_ratio
from rapidtail.skewell import example31_spec, marginal_log_density, tail_equivalence_profile
from rapidtail.tails1d import (
    _normal_marg_log_pdf,
    build_scaling,
    log_cdf,
    log_survival,
    quantile,
    reciprocal_hazard,
)


@pytest.fixture(scope="module")
def symmetric_spec():
    return example31_spec(0.0, (0.0, 0.0))


@pytest.fixture(scope="module")
def skew_spec():
    return example31_spec(0.0, (0.6, 0.0))  # theta_bar = (0.75, 0)


class TestLogSurvival:
    def test_symmetric_median(self, symmetric_spec):
        assert log_survival(symmetric_spec, 0, 0.0) == pytest.approx(
            math.log(0.5), abs=1e-14
        )

    def test_deep_tail_matches_erfc(self, symmetric_spec):
        got = log_survival(symmetric_spec, 0, 8.0)
        assert math.exp(got - float(log_ndtr(-8.0))) == pytest.approx(1.0, rel=1e-6)

    def test_monotone_decreasing(self, symmetric_spec):
        assert log_survival(symmetric_spec, 0, 2.0) > log_survival(symmetric_spec, 0, 3.0)

    @pytest.mark.parametrize("tb,z", [(0.75, 3.0), (0.75, 8.0), (0.75, -2.0), (-0.4, 2.0)])
    def test_quadrature_cross_check(self, tb, z):
        # independent route: integrate the closed-form margin density
        delta = tb / math.sqrt(1.0 + tb * tb)
        spec = example31_spec(0.0, (delta, 0.0))
        got = log_survival(spec, 0, z)
        ref = log_quad_upper(lambda s: _normal_marg_log_pdf(tb, s), z, rel_tol=1e-12)
        assert got == pytest.approx(ref, abs=5e-9)

    def test_cdf_survival_complement(self, skew_spec):
        for t in (-1.0, 0.3, 2.0):
            total = math.exp(log_cdf(skew_spec, 0, t)) + math.exp(
                log_survival(skew_spec, 0, t)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_tail_equivalence_of_survivals(self):
        # survival ratio approaches the density-ratio constant a_2 = 1/2
        spec = example31_spec(0.0, (0.6, 0.0))
        ratio = math.exp(log_survival(spec, 1, 12.0) - log_survival(spec, 0, 12.0))
        assert ratio == pytest.approx(0.5, abs=1e-3)


class TestReciprocalHazard:
    def test_mills_ratio_at_ten(self, symmetric_spec):
        assert reciprocal_hazard(symmetric_spec, 10.0) == pytest.approx(0.1, rel=0.02)
        assert reciprocal_hazard(symmetric_spec, 10.0) == pytest.approx(
            mills_ratio(10.0), rel=1e-9
        )

    def test_identity_m_f_over_survival(self, skew_spec):
        t = 4.0
        m = reciprocal_hazard(skew_spec, t)
        check = m * math.exp(
            marginal_log_density(skew_spec, 0, t) - log_survival(skew_spec, 0, t)
        )
        assert check == pytest.approx(1.0, abs=1e-14)

    def test_self_neglecting_at_fifty(self, symmetric_spec):
        defect = self_neglecting_defect(
            lambda t: reciprocal_hazard(symmetric_spec, t), 50.0, 1.0
        )
        assert defect < 5e-3

    def test_positive_on_probe_grid(self, skew_spec):
        for t in (1.0, 3.0, 6.0, 10.0):
            assert reciprocal_hazard(skew_spec, t) > 0.0

    def test_rejects_small_t(self, symmetric_spec):
        with pytest.raises(DomainError):
            reciprocal_hazard(symmetric_spec, 0.5)

    def test_gamma_class_membership_of_survival(self, symmetric_spec):
        # survival ratio F_bar(t + m x)/F_bar(t) approaches exp(-x)
        log_sf = lambda t: log_survival(symmetric_spec, 0, t)
        m = lambda t: reciprocal_hazard(symmetric_spec, t)
        for x in (-1.0, 1.0):
            ratio = gamma_class_ratio(log_sf, m, 8.0, x)
            assert ratio == pytest.approx(math.exp(-x), rel=0.02)


class TestBuildScaling:
    def test_case_tags(self, symmetric_spec, skew_spec):
        assert build_scaling(symmetric_spec).case_tag == "theta-sum-zero"
        assert build_scaling(skew_spec).case_tag == "theta-sum-nonzero"

    def test_zero_case_v_equals_survival(self, symmetric_spec):
        # for theta = 0 the construction collapses to V = m phi = F_bar
        sc = build_scaling(symmetric_spec)
        for t in (3.0, 5.0, 8.0):
            assert sc.log_v_of_t(t) == pytest.approx(
                log_survival(symmetric_spec, 0, t), abs=1e-9
            )
        # documented closed-composition view: V(5) is within ~4% of phi(5)/5
        # (the gap is the Mills-ratio correction 1 - 5 m(5) of order 1/t^2)
        v5 = math.exp(sc.log_v_of_t(5.0))
        phi5 = math.exp(-12.5) / math.sqrt(2 * math.pi)
        assert v5 == pytest.approx(phi5 / 5.0, rel=0.04)

    def test_log_v_strictly_decreasing(self, skew_spec):
        sc = build_scaling(skew_spec)
        vals = [sc.log_v_of_t(t) for t in (3.0, 4.0, 5.0, 6.0, 8.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("x", [-1.0, 0.0, 1.0])
    def test_v_gamma_defect_vanishes(self, symmetric_spec, x):
        sc = build_scaling(symmetric_spec)

        def defect(t):
            m = sc.m_of_t(t)
            return abs(math.exp(sc.log_v_of_t(t + m * x) - sc.log_v_of_t(t) + x) - 1.0)

        d4, d6, d8 = defect(4.0), defect(6.0), defect(8.0)
        if x == 0.0:
            assert d8 < 1e-12
        else:
            assert d4 > d6 > d8
            assert d8 < 0.02

    def test_branch_consistency_half_factor(self):
        # the nonzero-branch generator integral cut at zero is exactly half
        # the reduced generator: int_-inf^0 g3(r^2+s) dr = g2(s)/2
        g3 = make_normal_generator(3)
        g2 = reduce_dimension(g3)
        s = 2.0 * 36.0
        lhs = log_quad_lower(lambda r: g3.log_g(r * r + s), 0.0, rel_tol=1e-10)
        ratio = math.exp(lhs - float(g2.log_g(s)))
        assert ratio == pytest.approx(0.5, rel=0.02)
        assert ratio == pytest.approx(0.5, rel=1e-8)

    def test_mixed_signs_rejected(self):
        spec = example31_spec(0.0, (0.3, -0.2))
        with pytest.raises(NotTailEquivalentError):
            build_scaling(spec)

    def test_requires_centered_law(self):
        spec = example31_spec(0.0, (0.0, 0.0), mu=(0.5, 0.5))
        with pytest.raises(DomainError):
            build_scaling(spec)

    def test_near_boundary_flag(self):
        spec = example31_spec(0.0, (1e-8, 0.0))
        sc = build_scaling(spec)
        assert sc.case_tag == "theta-sum-nonzero"
        assert sc.near_zero_boundary


class TestQuantile:
    def test_symmetric_median(self, symmetric_spec):
        assert quantile(symmetric_spec, 0, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_extreme_upper_quantile(self, symmetric_spec):
        got = quantile(symmetric_spec, 0, 1.0 - 1e-10)
        ref = -float(ndtri(1e-10))
        assert got == pytest.approx(ref, rel=1e-6)

    @pytest.mark.parametrize("u", [1e-8, 0.3, 0.5])
    def test_round_trip_lower(self, skew_spec, u):
        t = quantile(skew_spec, 0, u)
        assert abs(math.exp(log_cdf(skew_spec, 0, t)) - u) < 1e-13 * min(u, 1 - u)

    @pytest.mark.parametrize("u", [0.7, 1.0 - 1e-8])
    def test_round_trip_upper(self, skew_spec, u):
        t = quantile(skew_spec, 0, u)
        assert abs(math.exp(log_survival(skew_spec, 0, t)) - (1 - u)) < 1e-13 * min(
            u, 1 - u
        )

    def test_mu_shift(self):
        spec = example31_spec(0.0, (0.6, 0.0), mu=(2.0, 0.0))
        base = example31_spec(0.0, (0.6, 0.0))
        assert quantile(spec, 0, 0.8) == pytest.approx(
            quantile(base, 0, 0.8) + 2.0, abs=1e-12
        )

    def test_negative_slope_margin(self):
        spec = example31_spec(0.0, (-0.4, -0.4))
        u = 0.95
        t = quantile(spec, 0, u)
        assert abs(math.exp(log_survival(spec, 0, t)) - (1 - u)) < 1e-9 * (1 - u)

    def test_domain_checks(self, symmetric_spec):
        with pytest.raises(DomainError):
            quantile(symmetric_spec, 0, 0.0)
        with pytest.raises(DomainError):
            quantile(symmetric_spec, 0, 1.0)
        with pytest.raises(DomainError):
            quantile(symmetric_spec, 5, 0.5)
