"""Pure-NumPy implementations of the hot kernels.

These mirror the compiled extension in ``_core.pyx`` and are selected at
import time when the extension is missing (or forced via ``HDMDC_PURE=1``).
Callers are expected to pass float64 arrays of the documented shapes;
validation happens one layer up.
"""

from __future__ import annotations

import numpy as np


def rollout_batch(A, B, xhat0, uhat0, u_future, q, horizon, n_keep):
    """Advance ``k`` augmented trajectories ``horizon`` steps.

    Each step applies ``x <- A @ x + B @ u`` and then shifts the newest
    forcing sample into the top block of ``u`` (blocks of ``q`` entries,
    newest first).

    Parameters
    ----------
    A : (p, p) ndarray
    B : (p, r) ndarray
    xhat0 : (p, k) ndarray
        Augmented states at the step before the first forecast instant.
    uhat0 : (r, k) ndarray
        Augmented inputs at the same instant, newest block first.
    u_future : (>= horizon - 1, q, k) ndarray
        Forcing samples consumed from step two onward.
    q : int
        Width of one input block.
    horizon : int
    n_keep : int
        Number of leading state rows recorded per step.

    Returns
    -------
    (horizon, n_keep, k) ndarray
    """
    p, k = xhat0.shape
    out = np.empty((horizon, n_keep, k), dtype=np.float64)
    x = np.array(xhat0, dtype=np.float64)
    u = np.array(uhat0, dtype=np.float64)
    # Diverging models legitimately overflow to inf; callers treat
    # non-finite trajectories as failed forecasts.
    with np.errstate(over="ignore", invalid="ignore"):
        for h in range(horizon):
            x = A @ x + B @ u
            out[h] = x[:n_keep]
            if h + 1 < horizon:
                if u.shape[0] > q:
                    u[q:] = u[:-q].copy()
                u[:q] = u_future[h]
    return out


def kde_eval(samples, grid, h):
    """Gaussian kernel density of ``samples`` on ``grid`` with bandwidth ``h``.

    Evaluates ``sum_i exp(-((y - s_i) / h)^2 / 2) / (T h sqrt(2 pi))`` for
    every grid point, chunked over the grid to bound memory.
    """
    samples = np.asarray(samples, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    n = samples.size
    scale = 1.0 / (n * h * np.sqrt(2.0 * np.pi))
    out = np.empty(grid.size, dtype=np.float64)
    # ~8 MB of scratch per chunk at 1e5 samples.
    chunk = max(1, int(1e7) // max(n, 1))
    for start in range(0, grid.size, chunk):
        g = grid[start:start + chunk, None]
        zsq = ((g - samples[None, :]) / h) ** 2
        out[start:start + chunk] = np.exp(-0.5 * zsq).sum(axis=1)
    return out * scale
