"""Aitken delta-squared acceleration of convergent sequences.

The transform is iterated while at least three terms remain; each pass maps
s_k -> s_{k+2} - (s_{k+2}-s_{k+1})^2 / ((s_{k+2}-s_{k+1}) - (s_{k+1}-s_k)).
Denominators at floating-point noise level would amplify garbage, so a pass
degenerates (and the last raw value is returned, flagged) once differences
stop being resolvable.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "aitken_extrapolate",
    "aitken_with_flag",
    "neville_extrapolate",
    "richardson_extrapolate",
]


def neville_extrapolate(h_grid: Sequence[float], seq: Sequence[float]) -> float:
    """Polynomial extrapolation to h = 0 through the points (h_i, s_i).

    This is Richardson extrapolation on an arbitrary grid: every error mode
    polynomial in h up to degree n-1 is cancelled exactly.  ``h_grid`` must
    be strictly decreasing toward 0 (probes ordered toward the limit).
    """
    h = [float(v) for v in h_grid]
    tab = [float(v) for v in seq]
    if len(h) != len(tab):
        raise ValueError("h grid and sequence lengths differ")
    if len(tab) < 2:
        raise ValueError("need at least 2 values to extrapolate")
    if any(b >= a for a, b in zip(h, h[1:])) or h[-1] <= 0.0:
        raise ValueError("h grid must be strictly decreasing and positive")
    n = len(tab)
    for m in range(1, n):
        for i in range(n - m):
            tab[i] = (h[i] * tab[i + 1] - h[i + m] * tab[i]) / (h[i] - h[i + m])
    return tab[0]


def aitken_with_flag(seq: Sequence[float]) -> tuple[float, bool]:
    """Accelerated limit and a flag marking degenerate (fallback) input.

    Fallback returns the last element of the deepest level reached.
    """
    s = [float(v) for v in seq]
    if len(s) < 3:
        raise ValueError("need at least 3 sequence elements to extrapolate")
    if not all(np.isfinite(s)):
        raise ValueError("sequence elements must be finite")
    scale = max(abs(v) for v in s)
    noise = 64.0 * np.finfo(float).eps * max(scale, 1e-300)
    fallback = False
    while len(s) >= 3:
        nxt = []
        for i in range(len(s) - 2):
            d1 = s[i + 1] - s[i]
            d2 = s[i + 2] - s[i + 1]
            denom = d2 - d1
            if abs(denom) <= noise:
                fallback = True
                break
            nxt.append(s[i + 2] - d2 * d2 / denom)
        if fallback:
            break
        s = nxt
    return s[-1], fallback


def aitken_extrapolate(seq: Sequence[float]) -> float:
    """Delta-squared accelerated limit of the tail of ``seq``."""
    value, _ = aitken_with_flag(seq)
    return value


def richardson_extrapolate(
    grid: Sequence[float], seq: Sequence[float], rate: float = 2.0
) -> float:
    """Richardson cascade assuming an error expansion in powers of t**-rate.

    Unlike the Aitken transform, which needs the error to decay geometrically
    in the sequence index (true on geometric t-grids), this uses the probe
    locations directly, eliminating t**-rate, t**-(2 rate), ... in turn.
    """
    ts = [float(t) for t in grid]
    vals = [float(v) for v in seq]
    if len(ts) != len(vals):
        raise ValueError("grid and sequence lengths differ")
    if len(vals) < 2:
        raise ValueError("need at least 2 values to extrapolate")
    if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
        raise ValueError("grid must be strictly increasing")
    return neville_extrapolate([t**-rate for t in ts], vals)
