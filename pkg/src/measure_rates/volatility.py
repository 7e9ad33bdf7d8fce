"""Centered multiplicative volatility fields with finitely many factors.

A field is specified by loading functions ``h_k`` and scales ``beta_k``; on a
probability measure it acts through

    g^k(mu, r) = beta_k * (h_k(r) - <h_k, mu>),     sigma(mu)(dr) = g(mu, r) mu(dr),

so each factor column integrates to zero against ``mu`` and vanishes at Dirac
states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure_space import (AtomicMeasure, DomainError, Interval, PiecewiseLinearFn,
                            hstar_norm_sq_batch, is_probability)

PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class VolatilityField:
    interval: Interval
    loadings: tuple
    scales: np.ndarray

    def __post_init__(self):
        scales = np.atleast_1d(np.asarray(self.scales, dtype=float))
        scales.setflags(write=False)
        object.__setattr__(self, "loadings", tuple(self.loadings))
        object.__setattr__(self, "scales", scales)

    @property
    def d(self) -> int:
        return len(self.loadings)

    @property
    def bound_constant(self) -> float:
        """``sum_k beta_k * 2 sup|h_k|``, a bound on ``|g(mu, r)|`` over probabilities."""
        return float(sum(b * 2.0 * h.sup_norm() for b, h in zip(self.scales, self.loadings)))

    def loading_matrix(self, points) -> np.ndarray:
        """``h_k(r_i)`` as an ``(n, d)`` array."""
        points = np.asarray(points, dtype=float)
        if self.d == 0:
            return np.zeros((len(points), 0))
        return np.stack([h(points) for h in self.loadings], axis=-1).reshape(len(points), self.d)

    def is_zero(self) -> bool:
        return self.d == 0 or not np.any(self.scales)


def make_centered_field(interval: Interval, h_list, beta) -> VolatilityField:
    h_list = list(h_list)
    beta = np.atleast_1d(np.asarray(beta, dtype=float)) if len(h_list) else np.empty(0)
    if len(beta) != len(h_list):
        raise ValueError(f"{len(h_list)} loadings but {len(beta)} scales")
    if np.any(beta < 0) or not np.all(np.isfinite(beta)):
        raise ValueError(f"factor scales must be finite and nonnegative, got {beta}")
    return VolatilityField(interval, h_list, beta)


def zero_field(interval: Interval) -> VolatilityField:
    return VolatilityField(interval, (), np.empty(0))


def builtin_fields(interval: Interval, beta: float = 0.5) -> dict:
    """The two reference fields used by the diagnostics.

    ``linear``: one factor loading on the rate itself.
    ``level-curvature``: the rate plus a tent peaked at the middle of the interval.
    """
    mid = 0.5 * (interval.left + interval.right)
    tent = PiecewiseLinearFn([interval.left, mid, interval.right], [0.0, 1.0, 0.0])
    ident = PiecewiseLinearFn.identity(interval)
    return {
        "linear": make_centered_field(interval, [ident], [beta]),
        "level-curvature": make_centered_field(interval, [ident, tent], [beta, beta]),
    }


def sigma_batch(field: VolatilityField, H: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Per-atom diffusion coefficients for a batch of simplex states.

    ``H`` is ``field.loading_matrix(points)`` (shape ``(n, d)``), ``X`` has shape
    ``(..., n)``; returns ``(..., n, d)``.
    """
    mean_h = X @ H                                   # (..., d)
    return (H - mean_h[..., None, :]) * field.scales * X[..., :, None]


@dataclass(frozen=True, eq=False)
class SigmaMatrix:
    points: np.ndarray
    values: np.ndarray   # (n, d)

    def column(self, k: int, interval: Interval) -> AtomicMeasure:
        return AtomicMeasure(interval, self.points, self.values[:, k])


def sigma_atoms(field: VolatilityField, mu: AtomicMeasure) -> SigmaMatrix:
    if not is_probability(mu, PROB_TOL):
        raise DomainError("volatility is only defined on probability measures")
    H = field.loading_matrix(mu.points)
    return SigmaMatrix(mu.points, sigma_batch(field, H, mu.weights))


def hs_norm(field: VolatilityField, mu: AtomicMeasure) -> float:
    s = sigma_atoms(field, mu)
    return hs_norm_of_columns(mu.interval, mu.points, s.values)


def hs_norm_of_columns(interval: Interval, points, z) -> float:
    """Hilbert-Schmidt norm of ``sum_i z_i delta_{r_i}`` for ``z`` of shape ``(n, d)``."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] == 0:
        return 0.0
    return float(np.sqrt(hstar_norm_sq_batch(interval, points, z.T).sum()))


def estimate_lipschitz(field: VolatilityField, trials: int = 1000, seed=0,
                       max_atoms: int = 8) -> float:
    """Largest observed ratio ``|sigma(mu) - sigma(nu)|_HS / |mu - nu|``.

    Pairs are random probability vectors on a random common support, so this is
    a lower bound on the true Lipschitz constant.  Half the supports include the
    interval endpoints and half the weight vectors are drawn close to a vertex
    of the simplex, where the largest ratios tend to sit.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if field.is_zero():
        return 0.0
    rng = np.random.default_rng(seed)
    iv = field.interval
    best = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, max_atoms + 1))
        pts = rng.uniform(iv.left, iv.right, n)
        if rng.random() < 0.5:
            pts[:2] = iv.left, iv.right
        pts = np.unique(pts)
        alpha = np.full(len(pts), 0.2 if rng.random() < 0.5 else 1.0)
        x = rng.dirichlet(alpha)
        y = rng.dirichlet(alpha)
        H = field.loading_matrix(pts)
        ds = sigma_batch(field, H, x) - sigma_batch(field, H, y)
        num = hs_norm_of_columns(iv, pts, ds)
        den = float(np.sqrt(hstar_norm_sq_batch(iv, pts, x - y)))
        if den > 0:
            best = max(best, num / den)
    return best
