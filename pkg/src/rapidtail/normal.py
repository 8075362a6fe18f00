"""High-precision standard-normal helpers shared across modules.

Thin wrappers over scipy.special: the complementary error function keeps the
CDF/survival relatively accurate over |x| <= 38, and the log-CDF switches to
its asymptotic expansion beyond, so tail evaluations near -40 neither
underflow nor lose relative precision.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri, ndtri_exp, owens_t

__all__ = [
    "LOG_SQRT_2PI",
    "log_phi",
    "log_ndtr",
    "ndtr",
    "ndtri",
    "ndtri_exp",
    "owens_t",
    "mills_ratio",
]

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_phi(x):
    """Log standard normal density, elementwise."""
    x = np.asarray(x, dtype=float)
    out = -LOG_SQRT_2PI - 0.5 * x * x
    return float(out) if out.ndim == 0 else out


def mills_ratio(t: float) -> float:
    """Phi_bar(t)/phi(t), stable for arbitrarily large t."""
    return math.exp(float(log_ndtr(-t)) - float(log_phi(t)))
