"""Time-discrete simulation of the atomic model on the probability simplex.

State: weights ``x`` on a fixed support ``r_1 < ... < r_n``.  The dynamics are

    dx_i = x_i (R(x) - r_i) dt + sum_k s_{ik}(x) dW^k,   R(x) = sum_j r_j x_j,

with ``s`` from a centered :class:`~measure_rates.volatility.VolatilityField`.

Random numbers follow a splittable contract: path ``p`` of an ensemble with
master seed ``s`` draws from a Philox stream keyed by ``SeedSequence(s,
spawn_key=(p,))``, factor-major (all steps of factor 1, then factor 2, ...).
A path's noise therefore depends only on ``(seed, p, d, number of steps)``:
not on the support, the scheme, chunking, or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .measure_space import AtomicMeasure, DomainError, Interval
from .simplex import in_simplex, project_on_face
from .volatility import VolatilityField, sigma_batch

SCHEMES = ("projected-euler", "exponential")
GRID_TOL = 1e-9
_CHUNK_BUDGET = 20_000_000   # floats of pre-drawn noise per chunk


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    support: np.ndarray
    field: VolatilityField
    dt: float
    T: float
    scheme: str = "projected-euler"
    seed: int = 0
    n_paths: int = 1

    def __post_init__(self):
        support = np.atleast_1d(np.asarray(self.support, dtype=float))
        support.setflags(write=False)
        object.__setattr__(self, "support", support)
        if support.ndim != 1 or support.size == 0:
            raise ValueError("support must be a non-empty list of points")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support points must be distinct and sorted ascending")
        if not self.interval.contains(support):
            raise DomainError(f"support {support} leaves the interval")
        if not (self.dt > 0 and self.T > 0 and math.isfinite(self.dt) and math.isfinite(self.T)):
            raise ValueError("dt and T must be positive and finite")
        if self.dt > self.T * (1 + GRID_TOL):
            raise ValueError(f"dt={self.dt} exceeds horizon T={self.T}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")

    @property
    def interval(self) -> Interval:
        return self.field.interval

    @property
    def n(self) -> int:
        return len(self.support)

    def time_grid(self) -> np.ndarray:
        """``0 = t_0 < ... < t_m = T``; the last step is shortened if ``dt`` does not divide ``T``."""
        ratio = self.T / self.dt
        m = round(ratio)
        if abs(ratio - m) <= GRID_TOL * max(1.0, ratio):
            times = np.arange(m + 1) * self.dt
        else:
            m = math.floor(ratio)
            times = np.append(np.arange(m + 1) * self.dt, self.T)
        times[-1] = self.T
        return times

    def replace(self, **changes) -> SimulationConfig:
        kw = dict(support=self.support, field=self.field, dt=self.dt, T=self.T,
                  scheme=self.scheme, seed=self.seed, n_paths=self.n_paths)
        kw.update(changes)
        return SimulationConfig(**kw)


@dataclass(frozen=True, eq=False)
class SimulationPath:
    support: np.ndarray
    interval: Interval
    times: np.ndarray
    states: np.ndarray              # (k, n)
    rates: np.ndarray               # (k,)
    integrated_rates: np.ndarray    # (k,) running trapezoid integral of the rate

    def measure(self, j: int) -> AtomicMeasure:
        return AtomicMeasure(self.interval, self.support, self.states[j])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True, eq=False)
class Ensemble:
    config: SimulationConfig
    x0: np.ndarray
    times: np.ndarray
    states: np.ndarray              # (P, k, n)
    rates: np.ndarray               # (P, k)
    integrated_rates: np.ndarray    # (P, k)
    path_indices: np.ndarray = dc_field(default=None)

    def __len__(self):
        return self.states.shape[0]

    def path(self, p: int) -> SimulationPath:
        return SimulationPath(self.config.support, self.config.interval, self.times,
                              self.states[p], self.rates[p], self.integrated_rates[p])

    @property
    def paths(self):
        return [self.path(p) for p in range(len(self))]

    def time_index(self, t: float) -> int:
        return _grid_index(self.times, t)


def _grid_index(times: np.ndarray, t: float) -> int:
    j = int(np.argmin(np.abs(times - t)))
    if abs(times[j] - t) > GRID_TOL * max(1.0, abs(t)):
        raise ValueError(f"time {t} is not on the recorded grid")
    return j


# -- single steps -----------------------------------------------------------

def drift_batch(points: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``b_i(x) = x_i (sum_j r_j x_j - r_i)`` row-wise."""
    R = X @ points
    return X * (R[..., None] - points)


def _euler_predictor(X, dW, h, points, H, field):
    y = X + drift_batch(points, X) * h
    if field.d:
        s = sigma_batch(field, H, X)
        y = y + np.einsum("...nd,...d->...n", s, dW)
    return y


def _euler_batch(X, dW, h, points, H, field):
    return project_on_face(_euler_predictor(X, dW, h, points, H, field), X > 0)


def _exp_batch(X, dW, h, points, H, field):
    R = X @ points
    expo = (R[..., None] - points) * h
    if field.d:
        # s_ik / x_i, written without the division
        tau = (H - (X @ H)[..., None, :]) * field.scales
        expo = expo + np.einsum("...nd,...d->...n", tau, dW) - 0.5 * np.sum(tau ** 2, axis=-1) * h
    y = np.where(X > 0, X * np.exp(expo), 0.0)
    return y / y.sum(axis=-1, keepdims=True)


_STEPPERS = {"projected-euler": _euler_batch, "exponential": _exp_batch}


def _prepare(x, dW, support, field):
    x = np.asarray(x, dtype=float)
    support = np.asarray(support, dtype=float)
    dW = np.atleast_1d(np.asarray(dW, dtype=float))
    if dW.shape[-1] != field.d:
        raise ValueError(f"expected {field.d} Brownian increments, got {dW.shape[-1]}")
    return x, dW, support, field.loading_matrix(support)


def euler_predictor(x, dW, dt, support, field) -> np.ndarray:
    """The Euler update before projection; its entries sum to 1 up to rounding."""
    x, dW, support, H = _prepare(x, dW, support, field)
    return _euler_predictor(x, dW, dt, support, H, field)


def euler_step(x, dW, dt, support, field) -> np.ndarray:
    x, dW, support, H = _prepare(x, dW, support, field)
    return _euler_batch(x, dW, dt, support, H, field)


def exp_step(x, dW, dt, support, field) -> np.ndarray:
    """Log-Euler step of the stochastic exponential, renormalised onto the simplex."""
    x, dW, support, H = _prepare(x, dW, support, field)
    return _exp_batch(x, dW, dt, support, H, field)


# -- random streams ---------------------------------------------------------

def path_generator(seed: int, path_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(path_index),))
    return np.random.Generator(np.random.Philox(ss))


def path_normals(seed: int, path_index: int, d: int, m: int) -> np.ndarray:
    """Standard normals for one path, shape ``(d, m)``, factor-major."""
    return path_generator(seed, path_index).standard_normal((d, m))


# -- drivers ------------------------------------------------------------------

def _check_start(config: SimulationConfig, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (config.n,):
        raise ValueError(f"initial state has shape {x0.shape}, support has {config.n} points")
    if not in_simplex(x0, 1e-12):
        raise DomainError(f"initial state {x0} is not in the probability simplex")
    return x0


def _run_block(config, x0, indices, record_idx, normals=None):
    times = config.time_grid()
    h = np.diff(times)
    m = len(h)
    d = config.field.d
    P = len(indices)
    points = np.asarray(config.support)
    H = config.field.loading_matrix(points)
    step = _STEPPERS[config.scheme]

    if normals is None:
        normals = np.empty((m, P, d))
        for q, p in enumerate(indices):
            normals[:, q, :] = path_normals(config.seed, p, d, m).T
    dW_scale = np.sqrt(h)

    X = np.broadcast_to(x0, (P, config.n)).copy()
    R = X @ points
    cum = np.zeros(P)
    k = len(record_idx)
    states = np.empty((P, k, config.n))
    rates = np.empty((P, k))
    integ = np.empty((P, k))
    slot = 0
    if record_idx[0] == 0:
        states[:, 0], rates[:, 0], integ[:, 0] = X, R, cum
        slot = 1
    for j in range(m):
        X = step(X, normals[j] * dW_scale[j], h[j], points, H, config.field)
        R_new = X @ points
        cum = cum + 0.5 * (R + R_new) * h[j]
        R = R_new
        if slot < k and record_idx[slot] == j + 1:
            states[:, slot], rates[:, slot], integ[:, slot] = X, R, cum
            slot += 1
    return states, rates, integ


def _record_indices(times, record_times):
    if record_times is None:
        return np.arange(len(times))
    idx = sorted({0} | {_grid_index(times, t) for t in record_times})
    return np.asarray(idx)


def simulate_path(config: SimulationConfig, x0, path_index: int = 0) -> SimulationPath:
    x0 = _check_start(config, x0)
    times = config.time_grid()
    rec = np.arange(len(times))
    states, rates, integ = _run_block(config, x0, [path_index], rec)
    return SimulationPath(config.support, config.interval, times,
                          states[0], rates[0], integ[0])


def simulate_ensemble(config: SimulationConfig, x0, record_times=None,
                      path_offset: int = 0, workers: int = 1,
                      chunk_size: int | None = None) -> Ensemble:
    """Simulate ``config.n_paths`` paths with indices ``path_offset, path_offset+1, ...``.

    ``record_times`` restricts what is stored (the rate integral is still
    accumulated at full resolution).  Results do not depend on ``workers`` or
    ``chunk_size``.
    """
    x0 = _check_start(config, x0)
    times = config.time_grid()
    rec = _record_indices(times, record_times)
    indices = np.arange(path_offset, path_offset + config.n_paths)
    m, d = len(times) - 1, max(config.field.d, 1)
    if chunk_size is None:
        chunk_size = max(1, min(16384, _CHUNK_BUDGET // (m * d)))
    chunks = [indices[i:i + chunk_size] for i in range(0, len(indices), chunk_size)]

    def run(ix):
        return _run_block(config, x0, ix, rec)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    states = np.concatenate([p[0] for p in parts])
    rates = np.concatenate([p[1] for p in parts])
    integ = np.concatenate([p[2] for p in parts])
    return Ensemble(config, x0, times[rec], states, rates, integ, indices)


def simulate_coupled(configs, starts, record_times=None, path_offset: int = 0):
    """Simulate several configurations driven by the same Brownian paths.

    All configs must share ``dt``, ``T``, ``seed``, ``n_paths`` and factor count
    ``d``; supports may differ.  Returns one :class:`Ensemble` per config.
    """
    first = configs[0]
    for c in configs[1:]:
        if (c.dt, c.T, c.seed, c.n_paths, c.field.d) != (first.dt, first.T, first.seed,
                                                         first.n_paths, first.field.d):
            raise ValueError("coupled configurations must share dt, T, seed, n_paths and d")
    return [simulate_ensemble(c, x, record_times, path_offset) for c, x in zip(configs, starts)]
