"""Zero-coupon bonds, yield curves and Monte Carlo martingale diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure_space import AtomicMeasure
from .sde_solver import GRID_TOL, Ensemble, SimulationPath


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int

    def within(self, k: float = 3.0, slack: float = 0.0) -> bool:
        """Two-sided check ``|mean| <= k*SE + slack``."""
        return abs(self.mean) <= k * self.std_error + slack

    def below(self, k: float = 3.0, slack: float = 0.0) -> bool:
        """One-sided check ``mean <= k*SE + slack``."""
        return self.mean <= k * self.std_error + slack


def mc_estimate(samples) -> McEstimate:
    samples = np.asarray(samples, dtype=float).ravel()
    n = samples.size
    if n == 0:
        raise ValueError("no samples")
    se = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(samples.mean()), se, n)


def bond_price(mu: AtomicMeasure, tau: float) -> float:
    """``P(tau) = int exp(-tau r) mu(dr)``."""
    if tau < 0:
        raise ValueError(f"time to maturity must be nonnegative, got {tau}")
    if tau == 0:
        return float(np.sum(mu.weights))
    return float(np.dot(mu.weights, np.exp(-tau * mu.points)))


@dataclass(frozen=True, eq=False)
class YieldCurve:
    maturities: np.ndarray
    prices: np.ndarray
    yields: np.ndarray

    def rows(self):
        return list(zip(self.maturities.tolist(), self.prices.tolist(), self.yields.tolist()))


def yield_curve(mu: AtomicMeasure, maturities) -> YieldCurve:
    taus = np.atleast_1d(np.asarray(maturities, dtype=float))
    if np.any(taus <= 0):
        raise ValueError("maturities must be positive")
    if np.any(np.diff(taus) < 0):
        raise ValueError("maturities must be sorted")
    prices = np.array([bond_price(mu, t) for t in taus])
    # -log(P)/tau loses everything to cancellation at tiny tau; log1p keeps it
    yields = -np.log1p(prices - 1.0) / taus
    return YieldCurve(taus, prices, yields)


def discount_factor(path: SimulationPath, T: float) -> float:
    """``exp(-int_0^T R_u du)`` with the trapezoid rule along the path.

    Uses the running integral at the last recorded time ``<= T``; a partial
    final segment interpolates the rate linearly.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    times = path.times
    if T > times[-1] * (1 + GRID_TOL) + GRID_TOL:
        raise ValueError(f"T={T} beyond path horizon {times[-1]}")
    j = int(np.searchsorted(times, T, side="right")) - 1
    if j + 1 < len(times) and abs(times[j + 1] - T) <= GRID_TOL * max(1.0, T):
        j += 1
    if abs(times[j] - T) <= GRID_TOL * max(1.0, T):
        return float(np.exp(-path.integrated_rates[j]))
    t0, t1 = times[j], times[j + 1]
    r0, r1 = path.rates[j], path.rates[j + 1]
    rT = r0 + (r1 - r0) * (T - t0) / (t1 - t0)
    integral = path.integrated_rates[j] + 0.5 * (r0 + rT) * (T - t0)
    return float(np.exp(-integral))


def martingale_residual(ensemble: Ensemble, T: float) -> McEstimate:
    """Mean of ``exp(-int_0^T R) - P(0, T)`` over the ensemble."""
    j = ensemble.time_index(T)
    mu0 = AtomicMeasure(ensemble.config.interval, ensemble.config.support, ensemble.x0)
    disc = np.exp(-ensemble.integrated_rates[:, j])
    return mc_estimate(disc - bond_price(mu0, T))


def supermartingale_check(ensemble: Ensemble, T: float) -> McEstimate:
    """Mean of ``R_T - R_0``; nonpositive in expectation for nonnegative measures."""
    j = ensemble.time_index(T)
    return mc_estimate(ensemble.rates[:, j] - ensemble.rates[:, 0])
