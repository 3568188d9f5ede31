#!/usr/bin/env python3
"""
Upper concave envelopes of rate expressions.

Two tools:
    uce_1d        least concave majorant of sampled points (upper hull)
    uce_at_power  time-sharing concavification of a rate function of (P1, P2)

The time-sharing form reads the envelope operationally: a transmitter may
use a fraction lam of the channel uses at powers (p1, p2) and stay silent
otherwise, subject to lam * p_i <= P_i. It is evaluated along the scaling
ray through (P1, P2): with operating point u * (P1, P2) the best admissible
fraction is min(1, 1/u), so

    uce(P1, P2) = max_u  min(1, 1/u) * rate_fn(u P1, u P2)

on the log grid u = boost_cap ** (i / grid_density), |i| <= grid_density.
u < 1 is power back-off, u > 1 is bursty transmission.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from errors import TooFewPointsError, UnsortedGridError

logger = logging.getLogger(__name__)

DEFAULT_GRID_DENSITY = 256
DEFAULT_BOOST_CAP = 100.0

RateFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    """Sampled function and its least concave majorant on the same grid."""

    grid: np.ndarray
    raw: np.ndarray
    env: np.ndarray
    hull_vertices: List[int]


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def uce_1d(grid, values) -> EnvelopeResult:
    """Least concave majorant of the points (grid[i], values[i]).

    Builds the upper hull with a monotone chain and interpolates linearly
    between hull vertices.

    Args:
        grid: Strictly increasing abscissae, at least two points
        values: Finite ordinates

    Returns:
        EnvelopeResult with env >= raw and env == raw at hull vertices

    Raises:
        TooFewPointsError: Fewer than two points
        UnsortedGridError: Grid not strictly increasing

    Example:
        >>> uce_1d([0.0, 1.0, 2.0], [1.0, 0.0, 1.0]).env
        array([1., 1., 1.])
    """
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 2:
        raise TooFewPointsError(f"Need at least 2 grid points, got {x.size}")
    if x.shape != y.shape:
        raise ValueError(f"grid and values differ in shape: {x.shape} vs {y.shape}")
    if np.any(np.diff(x) <= 0):
        raise UnsortedGridError("Envelope grid must be strictly increasing")
    if not np.all(np.isfinite(y)):
        raise ValueError("Envelope values must be finite")

    hull: List[int] = []
    for i in range(x.size):
        # pop while the last turn is not a strict right turn
        while len(hull) >= 2 and _cross(
            (x[hull[-2]], y[hull[-2]]), (x[hull[-1]], y[hull[-1]]), (x[i], y[i])
        ) >= 0:
            hull.pop()
        hull.append(i)

    env = np.interp(x, x[hull], y[hull])
    env[hull] = y[hull]
    env = np.maximum(env, y)
    return EnvelopeResult(grid=x, raw=y, env=env, hull_vertices=hull)


def power_boost_grid(
    grid_density: int = DEFAULT_GRID_DENSITY, boost_cap: float = DEFAULT_BOOST_CAP
) -> np.ndarray:
    """Log-spaced operating-point multipliers, symmetric around and including 1.

    Doubling ``grid_density`` yields a superset of the previous grid.
    """
    if grid_density < 1 or not boost_cap > 1.0:
        return np.array([1.0])
    exponents = np.arange(-grid_density, grid_density + 1) / grid_density
    grid = boost_cap**exponents
    grid[grid_density] = 1.0
    return grid


def uce_at_power(
    rate_fn: RateFunction,
    p1_max: float,
    p2_max: float,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> float:
    """Time-sharing concavification of ``rate_fn`` at power budget (p1_max, p2_max).

    Args:
        rate_fn: Vectorised rate in bits, called with arrays of (p1, p2)
        p1_max: Power budget of user 1
        p2_max: Power budget of user 2
        grid_density: Grid points per decade side of the scaling ray
        boost_cap: Largest power multiplier considered

    Returns:
        Enveloped rate, never below rate_fn(p1_max, p2_max)
    """
    u = power_boost_grid(grid_density, boost_cap)
    share = np.minimum(1.0, 1.0 / u)
    rates = np.asarray(rate_fn(u * p1_max, u * p2_max), dtype=float)
    values = share * np.broadcast_to(rates, u.shape)
    raw = float(np.asarray(rate_fn(np.array([p1_max]), np.array([p2_max])), dtype=float).ravel()[0])
    best = int(np.argmax(values))
    result = max(float(values[best]), raw)
    if result > raw:
        logger.debug(
            "Envelope improves on raw rate",
            extra={"raw": raw, "enveloped": result, "multiplier": float(u[best])},
        )
    return result
