"""Per-user utilities of throughput."""

from __future__ import annotations

import numpy as np


def g_alpha(x, alpha: float):
    """alpha-fair utility x^(1-alpha)/(1-alpha); ln x at alpha = 1.

    Raises for non-positive throughput when alpha >= 1.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = np.asarray(x, dtype=float)
    if alpha >= 1 and np.any(x <= 0):
        raise ValueError(f"alpha={alpha} needs strictly positive throughputs")
    if alpha == 0:
        out = x
    elif alpha == 1:
        out = np.log(x)
    else:
        out = x ** (1.0 - alpha) / (1.0 - alpha)
    return float(out) if out.ndim == 0 else out


def real_time_utility(u, threshold: float):
    """0 below the threshold, 1 - exp(-u) at or above it."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    u = np.asarray(u, dtype=float)
    out = np.where(u >= threshold, 1.0 - np.exp(-u), 0.0)
    return float(out) if out.ndim == 0 else out


def utility_fn(alpha: float = 0.0, realtime_mask=None, threshold: float | None = None):
    """Vectorized utility over a user-aligned array.

    Users flagged in ``realtime_mask`` use the real-time utility, the others
    ``G_alpha``.
    """
    if realtime_mask is None or not np.any(realtime_mask):
        return lambda x: g_alpha(np.asarray(x, dtype=float), alpha)
    rt = np.asarray(realtime_mask, dtype=bool)

    def f(x):
        x = np.asarray(x, dtype=float)
        el = g_alpha(np.where(rt, 1.0, x), alpha) if alpha >= 1 else g_alpha(x, alpha)
        return np.where(rt, real_time_utility(x, threshold), el)

    return f
