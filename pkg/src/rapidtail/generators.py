"""Elliptical density generators and Gumbel max-domain diagnostics.

A d-dimensional density generator g_d is the radial profile of an elliptical
density, normalized so that int_0^inf r**(d/2-1) g_d(r) dr = Gamma(d/2)/pi**(d/2).
Generators are carried in log form together with an auxiliary scale function
m(t) (self-neglecting: m(t + m(t)x) ~ m(t)).  The module provides

* the builtin Gaussian generator family,
* the normalization-defect check,
* dimension reduction g_d(s) = 2 int_0^inf g_{d+1}(r^2 + s) dr,
* the finite-t defect of the quadratic Gumbel max-domain condition
  g((t1 + m(t)x) Q (t1 + m(t)x)^T) ~ g(t^2 1Q1^T) exp(-x Q 1^T),
* self-neglecting and gamma-class ratio probes.

All evaluation happens in the log domain; quadratures accumulate via
log-sum-exp so that arguments with quadratic forms of several hundred stay
representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidDimensionError, InvalidMatrixError
from .logquad import log_quad, log_quad_upper

__all__ = [
    "DensityGenerator",
    "make_normal_generator",
    "normalization_defect",
    "reduce_dimension",
    "mda_gumbel_defect",
    "self_neglecting_defect",
    "gamma_class_ratio",
]

LOG_2PI = math.log(2.0 * math.pi)

# Probe grid for the self-neglecting necessary condition m(t)/t -> 0.
_AUX_PROBES = (10.0, 100.0, 1000.0)


@dataclass(frozen=True, eq=False)
class DensityGenerator:
    """A d-dimensional density generator in log form.

    ``log_g`` maps nonnegative quadratic-form values (scalar or ndarray) to
    the natural log of g_d; ``aux_m`` is the auxiliary scale of the Gumbel
    max-domain condition.  Instances are immutable and safe to share across
    threads.
    """

    dim: int
    log_g: Callable
    aux_m: Callable
    family: str = "user"


def _validate_generator(gen: DensityGenerator) -> DensityGenerator:
    if not isinstance(gen.dim, (int, np.integer)) or gen.dim < 1:
        raise InvalidDimensionError(f"generator dimension must be >= 1, got {gen.dim}")
    for s in (0.5, 100.0):
        v = float(gen.log_g(s))
        if not math.isfinite(v):
            raise DomainError(f"log_g({s}) = {v} is not finite")
    ratios = []
    for t in _AUX_PROBES:
        m = float(gen.aux_m(t))
        if not (m > 0.0):
            raise DomainError(f"aux_m({t}) = {m} must be positive")
        ratios.append(m / t)
    if not (ratios[0] > ratios[1] > ratios[2]):
        raise DomainError(
            "aux_m(t)/t must decrease on the probe grid t in {10, 100, 1000}; "
            f"got {ratios}"
        )
    return gen


def make_normal_generator(d: int) -> DensityGenerator:
    """Gaussian generator g_d(s) = (2 pi)**(-d/2) exp(-s/2), aux m(t) = 1/t."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {d}")
    d = int(d)

    def log_g(s):
        return -0.5 * d * LOG_2PI - 0.5 * np.asarray(s, dtype=float)

    def aux_m(t):
        return 1.0 / np.asarray(t, dtype=float)

    return _validate_generator(
        DensityGenerator(dim=d, log_g=log_g, aux_m=aux_m, family="builtin-normal")
    )


def _log_integrand_peak_cutoff(log_f: Callable, drop: float = 40.0) -> float:
    """Upper truncation point where log_f falls ``drop`` below its scanned peak."""
    grid = np.geomspace(1e-12, 1e4, 400)
    vals = np.asarray(log_f(grid), dtype=float)
    peak = float(np.max(vals))
    r_hi = float(grid[int(np.argmax(vals))])
    r_hi = max(r_hi, 1.0)
    for _ in range(80):
        if float(log_f(np.asarray([r_hi]))[0]) < peak - drop:
            return r_hi
        r_hi *= 2.0
    raise DomainError(
        "generator does not decay: integrand never fell 40 nats below its peak"
    )


def normalization_defect(gen: DensityGenerator, rel_tol: float = 1e-10) -> float:
    """|int_0^inf r**(d/2-1) g_d(r) dr  -  Gamma(d/2)/pi**(d/2)|.

    The integral is truncated where the integrand drops 40 nats below its
    peak and evaluated by adaptive log-domain quadrature.  Raises
    :class:`NumericFailureError` (carrying the last bracket) on
    non-convergence.
    """
    d = gen.dim

    def log_f(r):
        r = np.asarray(r, dtype=float)
        return (0.5 * d - 1.0) * np.log(r) + gen.log_g(r)

    r_hi = _log_integrand_peak_cutoff(log_f)
    integral = math.exp(log_quad(log_f, 0.0, r_hi, rel_tol=rel_tol))
    target = math.exp(gammaln(0.5 * d) - 0.5 * d * math.log(math.pi))
    return abs(integral - target)


def reduce_dimension(gen: DensityGenerator, rel_tol: float = 1e-10) -> DensityGenerator:
    """Generator one dimension down: g_d(s) = 2 int_0^inf g_{d+1}(r^2 + s) dr.

    The returned ``log_g`` evaluates the integral lazily by adaptive
    log-domain quadrature; the auxiliary function carries over unchanged
    (dimension reduction preserves the Gumbel max-domain condition with the
    same auxiliary scale).
    """
    if gen.dim < 2:
        raise InvalidDimensionError("cannot reduce a 1-dimensional generator")
    parent_log_g = gen.log_g

    def _one(s: float) -> float:
        def log_f(r):
            return parent_log_g(r * r + s)

        return math.log(2.0) + log_quad_upper(log_f, 0.0, rel_tol=rel_tol)

    def log_g(s):
        s_arr = np.asarray(s, dtype=float)
        if s_arr.ndim == 0:
            return _one(float(s_arr))
        return np.array([_one(float(v)) for v in s_arr])

    return _validate_generator(
        DensityGenerator(dim=gen.dim - 1, log_g=log_g, aux_m=gen.aux_m, family="reduced")
    )


def _check_q_matrix(q: np.ndarray) -> tuple[np.ndarray, float]:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InvalidMatrixError(f"Q must be square, got shape {q.shape}")
    scale = float(np.max(np.abs(q)))
    if scale > 0.0 and float(np.max(np.abs(q - q.T))) > 1e-12 * scale:
        raise InvalidMatrixError("Q must be symmetric")
    eigs = np.linalg.eigvalsh(0.5 * (q + q.T))
    norm = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if norm > 0.0 and float(np.min(eigs)) < -1e-10 * norm:
        raise InvalidMatrixError(
            f"Q has a negative eigenvalue {np.min(eigs):.3e} beyond the "
            f"tolerance floor {-1e-10 * norm:.3e}"
        )
    return q, norm


def mda_gumbel_defect(
    gen: DensityGenerator, q: np.ndarray, x: np.ndarray, t: float
) -> float:
    """Finite-t defect of the quadratic Gumbel max-domain condition.

    Returns ``|g({t1+m(t)x} Q {t1+m(t)x}^T) / [g(t^2 1Q1^T) exp(-x Q 1^T)] - 1|``
    with both generator evaluations in the log domain.  The quadratic form of
    the shifted argument is expanded as t^2 1Q1^T + 2 t m xQ1^T + m^2 xQx^T so
    that x = 0 yields a defect of exactly zero.
    """
    q, norm = _check_q_matrix(q)
    x = np.asarray(x, dtype=float)
    if x.shape != (q.shape[0],):
        raise InvalidMatrixError(f"x of shape {x.shape} does not match Q {q.shape}")
    if not (t > 0.0):
        raise DomainError(f"t must be positive, got {t}")
    if norm == 0.0:
        return 0.0
    one = np.ones(q.shape[0])
    one_q_one = float(one @ q @ one)
    if t * t * one_q_one <= 0.0:
        raise DomainError(
            "t^2 1Q1^T must be positive for a nonzero Q (1 lies in the kernel of Q)"
        )
    m = float(gen.aux_m(t))
    x_q_one = float(x @ q @ one)
    x_q_x = float(x @ q @ x)
    s_base = t * t * one_q_one
    s_shift = s_base + 2.0 * t * m * x_q_one + m * m * x_q_x
    if s_shift < 0.0:
        s_shift = 0.0
    lhs = float(gen.log_g(s_shift))
    rhs = float(gen.log_g(s_base)) - x_q_one
    return abs(math.expm1(lhs - rhs))


def self_neglecting_defect(mfun: Callable, t: float, x: float) -> float:
    """|m(t + m(t)x)/m(t) - 1|, the finite-t self-neglecting defect."""
    mt = float(mfun(t))
    shifted = t + mt * x
    if shifted <= 0.0:
        raise DomainError(f"t + m(t)x = {shifted} must be positive")
    return abs(float(mfun(shifted)) / mt - 1.0)


def gamma_class_ratio(log_gfun: Callable, mfun: Callable, t: float, x: float) -> float:
    """g(t + m(t)x)/g(t) for a positive function given by its log.

    Belonging to the gamma class with index alpha means this ratio tends to
    exp(alpha x); the caller compares against that target.
    """
    shifted = t + float(mfun(t)) * x
    return math.exp(float(log_gfun(shifted)) - float(log_gfun(t)))
