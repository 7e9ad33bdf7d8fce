"""Atomic signed measures on a bounded interval and the dual Sobolev norm.

The test-function space H carries ``|phi|_H^2 = phi(0)^2 + int phi'(r)^2 dr``
and its dual norm on a signed measure is

    |mu|^2 = mu(I)^2 + int_{-a}^0 mu[-a, r)^2 dr + int_0^b mu(r, b]^2 dr.

Both tail integrands are piecewise constant between atoms, so every norm here
is evaluated exactly, segment by segment.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """A value lies outside the set an operation is defined on."""


@dataclass(frozen=True)
class Interval:
    """The closed interval ``[-a, b]``; it always contains the origin."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValueError(f"invalid interval half-widths a={self.a}, b={self.b}")

    @property
    def left(self) -> float:
        return -float(self.a)

    @property
    def right(self) -> float:
        return float(self.b)

    @property
    def length(self) -> float:
        return float(self.a + self.b)

    def contains(self, r, tol: float = 0.0) -> bool:
        r = np.asarray(r, dtype=float)
        return bool(np.all((r >= self.left - tol) & (r <= self.right + tol)))


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite signed sum of Dirac masses, kept in canonical sorted form.

    Use :func:`new_atomic` to build one from unsorted input.
    """

    interval: Interval
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(self.points))
        object.__setattr__(self, "weights", _frozen(self.weights))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, AtomicMeasure):
            return NotImplemented
        return (self.interval == other.interval
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    def __add__(self, other: AtomicMeasure) -> AtomicMeasure:
        _check_same_interval(self, other)
        return new_atomic(self.interval,
                          np.concatenate([self.points, other.points]),
                          np.concatenate([self.weights, other.weights]))

    def __neg__(self) -> AtomicMeasure:
        return AtomicMeasure(self.interval, self.points, -self.weights)

    def __sub__(self, other: AtomicMeasure) -> AtomicMeasure:
        return self + (-other)

    def scale(self, c: float) -> AtomicMeasure:
        return AtomicMeasure(self.interval, self.points, c * self.weights)

    def __repr__(self):
        terms = ", ".join(f"{w:.6g}@{r:.6g}" for r, w in zip(self.points, self.weights))
        return f"AtomicMeasure([{-self.interval.a}, {self.interval.b}]; {terms})"


def new_atomic(interval: Interval, points, weights) -> AtomicMeasure:
    """Build an atomic measure, sorting the support and merging repeated points."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    weights = np.atleast_1d(np.asarray(weights, dtype=float))
    if points.shape != weights.shape or points.ndim != 1:
        raise ValueError(f"points and weights must be 1-d of equal length, "
                         f"got {points.shape} and {weights.shape}")
    if not interval.contains(points):
        raise DomainError(f"support points {points} not inside "
                          f"[{interval.left}, {interval.right}]")
    uniq, inverse = np.unique(points, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, weights)
    return AtomicMeasure(interval, uniq, merged)


def dirac(interval: Interval, r: float, mass: float = 1.0) -> AtomicMeasure:
    return new_atomic(interval, [r], [mass])


def zero_measure(interval: Interval) -> AtomicMeasure:
    return AtomicMeasure(interval, np.empty(0), np.empty(0))


def total_mass(mu: AtomicMeasure) -> float:
    return float(np.sum(mu.weights))


def is_probability(mu: AtomicMeasure, tol: float = 0.0) -> bool:
    if len(mu) == 0:
        return False
    return bool(np.all(mu.weights >= -tol) and abs(total_mass(mu) - 1.0) <= tol)


def _check_same_interval(mu: AtomicMeasure, nu: AtomicMeasure):
    if mu.interval != nu.interval:
        raise ValueError(f"interval mismatch: {mu.interval} vs {nu.interval}")


def hstar_norm_sq_batch(interval: Interval, points, weights) -> np.ndarray:
    """Squared dual norm for many weight vectors on one shared sorted support.

    ``weights`` has shape ``(..., n)`` over the ``n`` sorted ``points``; the
    result has shape ``(...)``.  This is the vectorised workhorse behind
    :func:`hstar_norm`, used directly by the simulation experiments.
    """
    points = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    mass = w.sum(axis=-1)
    out = mass ** 2

    left = points < 0
    # mu[-a, r) on (r_k, r_{k+1}) counts atoms up to r_k; integrate to 0.
    pl = points[left]
    if pl.size:
        cum = np.cumsum(w[..., left], axis=-1)
        ends = np.append(pl[1:], 0.0)
        out = out + np.sum(cum ** 2 * (ends - pl), axis=-1)
    right = points > 0
    # mu(r, b] on (r_{k-1}, r_k) counts atoms from r_k on; integrate from 0.
    pr = points[right]
    if pr.size:
        tail = np.cumsum(w[..., right][..., ::-1], axis=-1)[..., ::-1]
        starts = np.insert(pr[:-1], 0, 0.0)
        out = out + np.sum(tail ** 2 * (pr - starts), axis=-1)
    return out


def hstar_norm(mu: AtomicMeasure) -> float:
    return float(np.sqrt(hstar_norm_sq_batch(mu.interval, mu.points, mu.weights)))


def hstar_distance(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    _check_same_interval(mu, nu)
    return hstar_norm(mu - nu)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function given by knot values.

    Outside the knot range the function is extended as a constant, which adds
    nothing to the derivative integral.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.atleast_1d(np.asarray(self.knots, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if knots.shape != values.shape or knots.ndim != 1 or knots.size == 0:
            raise ValueError("knots and values must be non-empty 1-d arrays of equal length")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", _frozen(knots))
        object.__setattr__(self, "values", _frozen(values))

    def __call__(self, r):
        out = np.interp(r, self.knots, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def h_norm_sq(self) -> float:
        slopes_sq = np.diff(self.values) ** 2 / np.diff(self.knots)
        return float(self(0.0) ** 2 + slopes_sq.sum())

    def h_norm(self) -> float:
        return float(np.sqrt(self.h_norm_sq()))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def constant(cls, c: float, interval: Interval) -> PiecewiseLinearFn:
        return cls([interval.left, interval.right], [c, c])

    @classmethod
    def identity(cls, interval: Interval) -> PiecewiseLinearFn:
        return cls([interval.left, interval.right], [interval.left, interval.right])


def pair(mu: AtomicMeasure, phi: PiecewiseLinearFn) -> float:
    """Integral of ``phi`` against ``mu``."""
    return float(np.dot(mu.weights, phi(mu.points))) if len(mu) else 0.0


def riesz_function(mu: AtomicMeasure) -> PiecewiseLinearFn:
    """Representer of ``mu`` in H: its H-norm equals the dual norm of ``mu``."""
    iv = mu.interval
    knots = np.unique(np.concatenate([[iv.left, 0.0, iv.right], mu.points]))
    mass = total_mass(mu)
    values = np.empty_like(knots)
    i0 = int(np.searchsorted(knots, 0.0))
    values[i0] = mass
    # r > 0: slope on (k_j, k_{j+1}) is mu(s, b] = mass of atoms >= k_{j+1}
    for j in range(i0, len(knots) - 1):
        slope = mu.weights[mu.points >= knots[j + 1]].sum()
        values[j + 1] = values[j] + slope * (knots[j + 1] - knots[j])
    # r < 0: phi decreases towards -a with slope mu[-a, s) = mass of atoms <= k_{j-1}
    for j in range(i0, 0, -1):
        slope = mu.weights[mu.points <= knots[j - 1]].sum()
        values[j - 1] = values[j] + slope * (knots[j] - knots[j - 1])
    return PiecewiseLinearFn(knots, values)
