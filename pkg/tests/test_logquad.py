"""Log-domain adaptive quadrature against independent references."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from rapidtail.errors import NumericFailureError
from rapidtail.logquad import (
    log_quad,
    log_quad_lower,
    log_quad_real_line,
    log_quad_upper,
)


def log_std_normal(x):
    return -0.5 * np.log(2 * np.pi) - 0.5 * np.asarray(x, float) ** 2


def test_whole_line_normal_mass():
    assert math.exp(log_quad_real_line(log_std_normal)) == pytest.approx(1.0, rel=1e-12)


def test_half_line_and_finite_interval_vs_scipy():
    # oracle: scipy's linear-domain adaptive quadrature
    ref, _ = quad(lambda x: math.exp(-0.3 * x) / (1 + x * x), 0.25, 7.0)
    got = math.exp(
        log_quad(lambda x: -0.3 * x - np.log1p(x * x), 0.25, 7.0, rel_tol=1e-12)
    )
    assert got == pytest.approx(ref, rel=1e-10)
    ref_up, _ = quad(lambda x: math.exp(-(x**1.5)), 2.0, np.inf)
    got_up = math.exp(log_quad_upper(lambda x: -(x**1.5), 2.0, rel_tol=1e-12))
    assert got_up == pytest.approx(ref_up, rel=1e-9)


def test_lower_tail_matches_normal_cdf():
    from scipy.special import log_ndtr

    for b in (-3.0, 0.0, 1.96):
        got = log_quad_lower(log_std_normal, b, rel_tol=1e-12)
        assert got == pytest.approx(float(log_ndtr(b)), abs=1e-11)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_gamma_integral_with_endpoint_singularity(d):
    def log_f(r):
        return (0.5 * d - 1.0) * np.log(r) - 0.5 * d * np.log(2 * np.pi) - 0.5 * r

    target = math.exp(gammaln(0.5 * d) - 0.5 * d * math.log(math.pi))
    got = math.exp(log_quad(log_f, 0.0, 120.0, rel_tol=1e-10))
    assert got == pytest.approx(target, abs=1e-9)


def test_log_domain_shift_invariance():
    # subtracting 2000 nats from the integrand shifts the result by exactly
    # that amount; nothing underflows
    base = log_quad_real_line(log_std_normal)
    shifted = log_quad_real_line(lambda x: log_std_normal(x) - 2000.0)
    assert shifted == pytest.approx(base - 2000.0, abs=1e-10)


def test_zero_integrand_gives_neg_inf():
    res = log_quad(lambda x: np.full_like(np.asarray(x, float), -np.inf), 0.0, 1.0)
    assert res == -math.inf


def test_degenerate_and_invalid_intervals():
    assert log_quad(log_std_normal, 2.0, 2.0) == -math.inf
    with pytest.raises(ValueError):
        log_quad(log_std_normal, 3.0, 1.0)


def test_budget_exhaustion_reports_bracket():
    def log_f(r):
        return -0.5 * np.log(r)

    with pytest.raises(NumericFailureError) as err:
        log_quad(log_f, 0.0, 1.0, rel_tol=1e-10, max_panels=5)
    assert err.value.bracket is not None
    lo, hi = err.value.bracket
    assert 0.0 <= lo < hi <= 1.0
