"""Euclidean projection onto the probability simplex."""
from __future__ import annotations

import numpy as np


def project_rows(x: np.ndarray) -> np.ndarray:
    """Project every row of ``x`` onto ``{p : p >= 0, sum(p) = 1}``.

    Sort-and-threshold: with ``u`` sorted descending, ``k`` is the largest
    index with ``u_k > (cumsum(u)_k - 1) / k`` and the result is
    ``max(x - tau_k, 0)``.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("simplex projection needs finite input")
    if x.shape[-1] < 1:
        raise ValueError("cannot project an empty vector")
    n = x.shape[-1]
    u = -np.sort(-x, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0
    # cond is true on a prefix; k = number of true entries (always >= 1)
    k = np.count_nonzero(cond, axis=-1)
    tau = np.take_along_axis(css, (k - 1)[..., None], axis=-1) / k[..., None]
    return np.maximum(x - tau, 0.0)


def project(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("project expects a single vector; use project_rows for batches")
    return project_rows(x)


def project_on_face(x: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Project rows of ``x`` onto the face of the simplex spanned by ``active``.

    Inactive coordinates come back as exact zeros.  The simulation uses this so
    that atoms with zero weight stay at zero weight.
    """
    x = np.asarray(x, dtype=float)
    active = np.asarray(active, dtype=bool)
    masked = np.where(active, x, -np.inf)
    # -inf entries sort last and never enter the threshold prefix
    n = x.shape[-1]
    u = -np.sort(-masked, axis=-1)
    finite = np.isfinite(u)
    css = np.cumsum(np.where(finite, u, 0.0), axis=-1) - 1.0
    ks = np.arange(1, n + 1)
    with np.errstate(invalid="ignore"):
        cond = finite & (u - css / ks > 0)
    k = np.count_nonzero(cond, axis=-1)
    tau = np.take_along_axis(css, (k - 1)[..., None], axis=-1) / k[..., None]
    return np.where(active, np.maximum(x - tau, 0.0), 0.0)


def in_simplex(x, tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= -tol) and np.all(np.abs(x.sum(axis=-1) - 1.0) <= tol))
