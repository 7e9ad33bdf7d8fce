"""Independent reference computations.

Everything here is deliberately computed a different way from the production
path: closed-form deterministic flows, midpoint quadrature of the dual norm,
adaptive quadrature against continuous targets, and grid search over the
simplex.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .measure_space import (AtomicMeasure, DomainError, Interval, PiecewiseLinearFn,
                            hstar_norm)
from .operators import short_rate
from .pricing import bond_price


# -- deterministic flow -------------------------------------------------------

def flow_normaliser(mu0: AtomicMeasure, t: float) -> float:
    """``G_t = int exp(-r t) mu0(dr)``."""
    return float(np.dot(mu0.weights, np.exp(-t * mu0.points)))


def deterministic_flow(mu0: AtomicMeasure, t: float) -> AtomicMeasure:
    """Solution of the noiseless equation: ``mu_t(dr) = exp(-r t) mu0(dr) / G_t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    G = flow_normaliser(mu0, t)
    if not G > 0:
        raise DomainError(f"normaliser G_t = {G} is not positive")
    return AtomicMeasure(mu0.interval, mu0.points, mu0.weights * np.exp(-t * mu0.points) / G)


def deterministic_short_rate(mu0: AtomicMeasure, t: float) -> float:
    return short_rate(deterministic_flow(mu0, t))


def flow_discount_identity(mu0: AtomicMeasure, t: float, T: float) -> tuple:
    """``(G_T / G_t, P_t(T - t))`` along the deterministic flow; the two agree."""
    if not 0 <= t <= T:
        raise ValueError("need 0 <= t <= T")
    Gt, GT = flow_normaliser(mu0, t), flow_normaliser(mu0, T)
    if not (Gt > 0 and GT > 0):
        raise DomainError("flow normaliser is not positive")
    return GT / Gt, bond_price(deterministic_flow(mu0, t), T - t)


# -- brute-force dual norm ------------------------------------------------------

def hstar_norm_quadrature(mu: AtomicMeasure, cells: int) -> float:
    """Midpoint-rule value of the *squared* dual norm.

    The cells are shared between ``[-a, 0]`` and ``[0, b]`` in proportion to
    their lengths; tail masses at each midpoint are summed directly.
    """
    if cells < 1:
        raise ValueError("cells must be >= 1")
    iv = mu.interval
    a, b = float(iv.a), float(iv.b)
    n_left = int(round(cells * a / (a + b))) if a > 0 else 0
    n_right = cells - n_left if b > 0 else 0
    if a > 0 and n_left == 0:
        n_left = 1
    if b > 0 and n_right == 0:
        n_right = 1
    total = float(np.sum(mu.weights)) ** 2
    if n_left:
        hl = a / n_left
        mids = -a + (np.arange(n_left) + 0.5) * hl
        below = (mu.points[None, :] < mids[:, None]) @ mu.weights
        total += float(np.sum(below ** 2) * hl)
    if n_right:
        hr = b / n_right
        mids = (np.arange(n_right) + 0.5) * hr
        above = (mu.points[None, :] > mids[:, None]) @ mu.weights
        total += float(np.sum(above ** 2) * hr)
    return total


# -- norm equivalence on a fixed support ---------------------------------------

def hat_functions(support, interval: Interval) -> list:
    """One tent per atom: 1 at its own atom, 0 at every other atom.

    Interior tents span the two neighbours.  At the extreme atoms the single
    available leg is mirrored to the outer side and the result is clipped to
    the interval.  A lone atom gets the constant 1.
    """
    r = np.asarray(support, dtype=float)
    N = len(r)
    if N == 1:
        return [PiecewiseLinearFn.constant(1.0, interval)]
    lo, hi = interval.left, interval.right
    out = []
    for j in range(N):
        left_w = r[j] - r[j - 1] if j > 0 else r[j + 1] - r[j]
        right_w = r[j + 1] - r[j] if j < N - 1 else r[j] - r[j - 1]
        xs = [r[j] - left_w, r[j], r[j] + right_w]
        ys = [0.0, 1.0, 0.0]
        # clip the tent to [lo, hi]
        if xs[0] < lo:
            ys[0] = 1.0 - (r[j] - lo) / left_w
            xs[0] = lo
        if xs[2] > hi:
            ys[2] = 1.0 - (hi - r[j]) / right_w
            xs[2] = hi
        pts = [(x, y) for x, y in zip(xs, ys)]
        # an atom sitting on an endpoint leaves a zero-length leg
        pts = [p for k, p in enumerate(pts) if k == 0 or p[0] > pts[k - 1][0]]
        out.append(PiecewiseLinearFn([p[0] for p in pts], [p[1] for p in pts]))
    return out


def norm_equivalence_constants(support, interval: Interval) -> tuple:
    """``(c, C)`` with ``c sum|z_i| <= |sum z_i delta_{r_i}|_HS <= C sum|z_i|``."""
    r = np.asarray(support, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("support must be a non-empty list")
    if np.any(np.diff(r) <= 0):
        raise ValueError("support must be sorted with distinct points")
    if not interval.contains(r):
        raise DomainError("support leaves the interval")
    C = max(hstar_norm(AtomicMeasure(interval, [x], [1.0])) for x in r)
    hats = hat_functions(r, interval)
    ratios = [abs(phi(x)) / phi.h_norm() for phi, x in zip(hats, r)]
    c = min(ratios) / len(r)
    return c, C


# -- continuous reference measures ---------------------------------------------

@dataclass(frozen=True)
class ExponentialTilt:
    """Probability density proportional to ``exp(-kappa r)`` on the interval.

    ``kappa = 0`` is the uniform law.  The noiseless flow maps this family to
    itself: running for time ``t`` adds ``t`` to ``kappa``.
    """

    interval: Interval
    kappa: float = 0.0

    def _z(self) -> float:
        lo, hi = self.interval.left, self.interval.right
        k = self.kappa
        if abs(k) * (hi - lo) < 1e-12:
            return hi - lo
        return (math.exp(-k * lo) - math.exp(-k * hi)) / k

    def cdf(self, r):
        lo = self.interval.left
        r = np.clip(np.asarray(r, dtype=float), lo, self.interval.right)
        k = self.kappa
        if abs(k) * self.interval.length < 1e-12:
            return (r - lo) / self.interval.length
        return (math.exp(-k * lo) - np.exp(-k * r)) / k / self._z()

    def density(self, r):
        return np.exp(-self.kappa * np.asarray(r, dtype=float)) / self._z()

    def cell_masses(self, edges) -> np.ndarray:
        return np.diff(self.cdf(edges))

    def flow(self, t: float) -> ExponentialTilt:
        return ExponentialTilt(self.interval, self.kappa + t)

    def mean(self) -> float:
        lo, hi = self.interval.left, self.interval.right
        return integrate.quad(lambda r: r * float(self.density(r)), lo, hi, epsabs=1e-14)[0]

    def pair(self, phi: PiecewiseLinearFn) -> float:
        lo, hi = self.interval.left, self.interval.right
        brk = [k for k in phi.knots if lo < k < hi]
        val, _ = integrate.quad(lambda r: phi(r) * float(self.density(r)), lo, hi,
                                points=brk or None, epsabs=1e-14, epsrel=1e-12, limit=200)
        return val

    def hstar_distance_sq(self, mu: AtomicMeasure) -> float:
        """Squared dual distance to an atomic measure, by adaptive quadrature per segment."""
        iv = self.interval
        lo, hi = iv.left, iv.right
        total = (float(np.sum(mu.weights)) - 1.0) ** 2
        brk = np.unique(np.concatenate([[lo, 0.0, hi], mu.points]))
        for u, v in zip(brk[:-1], brk[1:]):
            if v <= 0:
                A = float(mu.weights[mu.points <= u].sum())
                f = lambda r, A=A: (A - float(self.cdf(r))) ** 2
            else:
                A = float(mu.weights[mu.points >= v].sum())
                f = lambda r, A=A: (A - (1.0 - float(self.cdf(r)))) ** 2
            total += integrate.quad(f, u, v, epsabs=1e-15, epsrel=1e-12)[0]
        return total


# -- simplex projection by search ------------------------------------------------

def simplex_projection_by_active_sets(x) -> np.ndarray:
    """Exact projection by trying every support set and keeping the best feasible KKT point."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    best, best_d = None, math.inf
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            S = list(S)
            p = np.zeros(n)
            p[S] = x[S] - (x[S].sum() - 1.0) / k
            if np.any(p < 0):
                continue
            d = float(np.sum((p - x) ** 2))
            if d < best_d:
                best, best_d = p, d
    return best


def simplex_projection_by_grid(x, resolution: float = 1e-3, coarse: float = 0.05) -> np.ndarray:
    """Grid search over simplex points, refined around the best point until ``resolution``.

    The objective is convex, so zooming in on the best coarse cell cannot miss
    the minimiser by more than one coarse step.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 1:
        return np.ones(1)
    step = coarse
    centre = None
    while True:
        if centre is None:
            axes = [np.arange(0.0, 1.0 + step / 2, step)] * (n - 1)
        else:
            axes = [np.clip(c + np.arange(-4, 5) * step, 0.0, 1.0) for c in centre[:-1]]
        grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n - 1, -1).T
        last = 1.0 - grid.sum(axis=1)
        keep = last >= -1e-12
        pts = np.column_stack([grid[keep], np.maximum(last[keep], 0.0)])
        d = np.sum((pts - x) ** 2, axis=1)
        centre = pts[int(np.argmin(d))]
        if step <= resolution * (1 + 1e-9):
            return centre
        step = max(step / 4, resolution)
