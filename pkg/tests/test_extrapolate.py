"""Sequence acceleration: Aitken delta-squared and Richardson cascades."""

import math

import pytest

from rapidtail.extrapolate import (
    aitken_extrapolate,
    aitken_with_flag,
    richardson_extrapolate,
)


def test_geometric_error_is_killed_exactly():
    # 1 + 2^-k decay: a single delta-squared pass is exact
    assert aitken_extrapolate([1.5, 1.25, 1.125]) == pytest.approx(1.0, abs=1e-9)


def test_constant_sequence_falls_back_to_last():
    value, fallback = aitken_with_flag([3.7, 3.7, 3.7])
    assert value == 3.7
    assert fallback


def test_inverse_square_sequence_frozen_value():
    # s(t) = 1 + 1/t^2 at t = 3, 4, 5.  The delta-squared transform gives
    # exactly 1535/1504 (worked out in rationals); the residual against the
    # true limit 1 is 31/1504 ~ 2.06e-2, since the error decay is a power
    # law, not geometric, on this grid.
    seq = [1 + 1 / 9, 1 + 1 / 16, 1 + 1 / 25]
    value = aitken_extrapolate(seq)
    assert value == pytest.approx(1535.0 / 1504.0, rel=1e-12)
    assert abs(value - 1.0) == pytest.approx(31.0 / 1504.0, rel=1e-9)


def test_geometric_grid_makes_inverse_square_geometric():
    # the same 1/t^2 error on a geometric t-grid decays geometrically in the
    # index, so iterated Aitken nails it
    grid = [2.0, 4.0, 8.0, 16.0, 32.0]
    seq = [1 + 1 / (t * t) for t in grid]
    assert aitken_extrapolate(seq) == pytest.approx(1.0, abs=1e-10)


def test_short_or_nonfinite_input_raises():
    with pytest.raises(ValueError):
        aitken_extrapolate([1.0, 2.0])
    with pytest.raises(ValueError):
        aitken_extrapolate([1.0, math.inf, 2.0])


def test_richardson_exact_on_pure_power_error():
    grid = [3.0, 4.0, 5.0, 6.0]
    seq = [2.0 + 5.0 / (t * t) for t in grid]
    assert richardson_extrapolate(grid, seq) == pytest.approx(2.0, abs=1e-12)


def test_richardson_two_modes():
    grid = [3.0, 4.0, 5.0, 6.0, 8.0]
    seq = [1.0 + 0.9 / t**2 - 3.0 / t**4 for t in grid]
    assert richardson_extrapolate(grid, seq) == pytest.approx(1.0, abs=1e-10)


def test_richardson_validates_grid():
    with pytest.raises(ValueError):
        richardson_extrapolate([3.0, 3.0, 4.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        richardson_extrapolate([3.0, 4.0], [1.0])
