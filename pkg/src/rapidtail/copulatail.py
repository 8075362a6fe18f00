"""Copula-level tail objects with the slowly varying factor cancelled.

Near the upper corner the copula density and joint survival behave like

    c(1 - u w) ~ u**(kappa - d) l(u) lambda_U(w),
    C_bar(1 - u w) ~ u**kappa l(u) b_U(w),

where l is slowly varying at 0 and never identified concretely for this
family.  Every numeric estimator here is therefore a ratio of two
evaluations at the same u, in which l cancels as u -> 0.  The closed forms
come from substituting w_i = a_i exp(-x_i) into the exponential tail density:

    lambda_U(w) = K prod_i a_i**(-c_i) w_i**(c_i - 1),
    b_U(w)      = K prod_i a_i**(-c_i) w_i**(c_i) / c_i,

homogeneous of orders kappa - d and kappa.  The mixed partial of b_U is
lambda_U and the orthant integral of lambda_U over [0, w] is b_U, which the
tests check by finite differences and quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .skewell import SkewEllipticalSpec, log_density, marginal_log_density, tail_equivalence_profile
from .tailasym import ExponentialTailDensity, closed_form_tail_density
from .tails1d import quantile
from .verify import joint_survival

__all__ = [
    "CopulaTailForm",
    "copula_density",
    "lambda_u_closed_form",
    "log_copula_density",
    "numeric_b_u_ratio",
    "numeric_lambda_u_ratio",
    "scaling_defect_lambda_u",
    "survival_copula_value",
]

_U_MAX = 1e-4
_UW_MAX = 0.05


@dataclass(frozen=True, eq=False)
class CopulaTailForm:
    """Closed-form upper tail density and tail dependence function."""

    etd: ExponentialTailDensity
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != self.etd.rate.shape:
            raise DomainError("tail-equivalence constants do not match the rate vector")
        if np.any(a <= 0.0):
            raise DomainError("tail-equivalence constants must be positive")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def kappa(self) -> float:
        return self.etd.kappa

    @property
    def dim(self) -> int:
        return self.etd.dim

    def log_lambda_u(self, w) -> float:
        w = np.asarray(w, dtype=float)
        c = self.etd.rate
        return float(
            self.etd.log_coeff
            - np.sum(c * np.log(self.a))
            + np.sum((c - 1.0) * np.log(w))
        )

    def lambda_u(self, w) -> float:
        return math.exp(self.log_lambda_u(w))

    def log_b_u(self, w) -> float:
        w = np.asarray(w, dtype=float)
        c = self.etd.rate
        return float(
            self.etd.log_coeff
            - np.sum(c * np.log(self.a))
            + np.sum(c * np.log(w) - np.log(c))
        )

    def b_u(self, w) -> float:
        return math.exp(self.log_b_u(w))


def lambda_u_closed_form(spec: SkewEllipticalSpec) -> CopulaTailForm:
    """Closed-form copula tail objects for a right-tail-equivalent spec."""
    profile = tail_equivalence_profile(spec)
    etd = closed_form_tail_density(spec)  # validates equivalence, mu, rates
    return CopulaTailForm(etd=etd, a=profile.a)


def log_copula_density(spec: SkewEllipticalSpec, u) -> float:
    """log c(u) by Sklar inversion: density over the product of margins."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.dim,):
        raise DomainError(f"u has shape {u.shape}, expected ({spec.dim},)")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("copula arguments must lie strictly inside (0, 1)")
    y = np.array([quantile(spec, i, float(u[i])) for i in range(spec.dim)])
    log_c = log_density(spec, y)
    for i in range(spec.dim):
        log_c -= marginal_log_density(spec, i, float(y[i]))
    return log_c


def copula_density(spec: SkewEllipticalSpec, u) -> float:
    """Copula density c(u) in linear scale."""
    return math.exp(log_copula_density(spec, u))


def survival_copula_value(spec: SkewEllipticalSpec, u) -> float:
    """Survival copula C_hat(u) = C_bar(1 - u) = P(margin-uniforms > 1 - u)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.dim,):
        raise DomainError(f"u has shape {u.shape}, expected ({spec.dim},)")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("copula arguments must lie strictly inside (0, 1)")
    a = np.array([quantile(spec, i, float(1.0 - u[i])) for i in range(spec.dim)])
    return math.exp(joint_survival(spec, a))


def _check_corner_args(u: float, *ws) -> None:
    if not 0.0 < u <= _U_MAX:
        raise DomainError(f"u must lie in (0, {_U_MAX}], got {u}")
    for w in ws:
        if np.any(np.asarray(w) <= 0.0):
            raise DomainError("direction vectors must be strictly positive")
        if float(np.max(u * np.asarray(w))) > _UW_MAX:
            raise DomainError(
                f"u*w must stay below {_UW_MAX} to remain in the corner regime"
            )


def numeric_lambda_u_ratio(spec: SkewEllipticalSpec, w, w_ref, u: float) -> float:
    """c(1 - u w) / c(1 - u w_ref), a finite-u estimate of
    lambda_U(w)/lambda_U(w_ref) (the slowly varying factor cancels)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    w_ref = np.atleast_1d(np.asarray(w_ref, dtype=float))
    _check_corner_args(u, w, w_ref)
    num = log_copula_density(spec, 1.0 - u * w)
    den = log_copula_density(spec, 1.0 - u * w_ref)
    return math.exp(num - den)


def scaling_defect_lambda_u(spec: SkewEllipticalSpec, w, s: float, u: float) -> float:
    """|c(1 - u s w)/c(1 - u w) * s**(d - kappa) - 1|, the finite-u defect of
    the homogeneity lambda_U(s w) = s**(kappa - d) lambda_U(w)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if s <= 0.0:
        raise DomainError(f"scale must be positive, got {s}")
    _check_corner_args(u, w, s * w)
    if s == 1.0:
        return 0.0
    num = log_copula_density(spec, 1.0 - u * s * w)
    den = log_copula_density(spec, 1.0 - u * w)
    return abs(math.expm1(num - den + (spec.dim - spec.kappa_u) * math.log(s)))


def numeric_b_u_ratio(spec: SkewEllipticalSpec, w, w_ref, u: float) -> float:
    """C_bar(1 - u w) / C_bar(1 - u w_ref) -> b_U(w)/b_U(w_ref) as u -> 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    w_ref = np.atleast_1d(np.asarray(w_ref, dtype=float))
    _check_corner_args(u, w, w_ref)
    if np.array_equal(w, w_ref):
        return 1.0
    num_a = np.array([quantile(spec, i, float(1.0 - u * w[i])) for i in range(spec.dim)])
    den_a = np.array(
        [quantile(spec, i, float(1.0 - u * w_ref[i])) for i in range(spec.dim)]
    )
    return math.exp(joint_survival(spec, num_a) - joint_survival(spec, den_a))
