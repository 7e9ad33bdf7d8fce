"""Short rate, multiplication operator and the quadratic drift."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure_space import AtomicMeasure, Interval, _check_same_interval


def short_rate(mu: AtomicMeasure) -> float:
    """First moment ``int r mu(dr)``."""
    return float(np.dot(mu.points, mu.weights)) if len(mu) else 0.0


def rho_star(mu: AtomicMeasure) -> AtomicMeasure:
    """Multiply the measure by the identity function, ``r mu(dr)``."""
    return AtomicMeasure(mu.interval, mu.points, mu.points * mu.weights)


def star_product(mu: AtomicMeasure, nu: AtomicMeasure) -> AtomicMeasure:
    """``nu`` rescaled by the short rate of ``mu``; bilinear in both."""
    _check_same_interval(mu, nu)
    return nu.scale(short_rate(mu))


def drift_F(mu: AtomicMeasure) -> AtomicMeasure:
    """``(R(mu) - r) mu(dr)``.

    Zero-weight atoms are kept so that support grids stay aligned along a path.
    """
    R = short_rate(mu)
    return AtomicMeasure(mu.interval, mu.points, mu.weights * (R - mu.points))


@dataclass(frozen=True)
class DriftConstants:
    interval: Interval
    bound_R: float
    bound_rho: float
    c1: float


def drift_constants(interval: Interval) -> DriftConstants:
    """Operator bounds for ``R``, ``rho*`` and the Lipschitz constant of the drift on probabilities."""
    L = interval.length
    bound_R = math.sqrt(L)
    bound_rho = math.sqrt(2.0 * (L * L + 2.0 * L + 2.0))
    c1 = 2.0 * math.sqrt(2.0 * L * (1.0 + L)) + bound_rho
    return DriftConstants(interval, bound_R, bound_rho, c1)
