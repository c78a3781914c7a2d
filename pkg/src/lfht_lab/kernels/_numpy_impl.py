"""Pure-numpy kernels.

All kernels are integer-exact: results are identical bit-for-bit to the numba
backend regardless of summation order, because the accumulators are int64.
Callers are responsible for keeping n*m*max_count within int64 range.
"""

from __future__ import annotations

import numpy as np


def batch_counts(obs: np.ndarray, k: int) -> np.ndarray:
    """Per-row bin counts of 1-based observations.

    obs has shape (trials, n); returns int64 of shape (trials, k).
    """
    obs = np.asarray(obs)
    t, n = obs.shape
    if n == 0:
        return np.zeros((t, k), dtype=np.int64)
    offsets = np.arange(t, dtype=np.int64)[:, None] * k
    flat = np.bincount(
        (obs.astype(np.int64) - 1 + offsets).ravel(), minlength=t * k
    )
    return flat.reshape(t, k).astype(np.int64)


def l2_diff_numerator(cx: np.ndarray, cy: np.ndarray, cz: np.ndarray,
                      n: int, m: int) -> np.ndarray:
    """Integer core of the squared-L2 difference statistic, per row.

    The statistic is numerator / (n*m)**2 where
    numerator = sum_i (m*cx_i - n*cz_i)**2 - (m*cy_i - n*cz_i)**2.
    """
    cx = cx.astype(np.int64)
    cy = cy.astype(np.int64)
    cz = cz.astype(np.int64)
    dx = m * cx - n * cz
    dy = m * cy - n * cz
    return np.sum(dx * dx - dy * dy, axis=1)


def collision_pairs(counts: np.ndarray) -> np.ndarray:
    """Number of unordered colliding pairs per row: sum_i c_i*(c_i-1)/2."""
    c = counts.astype(np.int64)
    return np.sum(c * (c - 1) // 2, axis=1)


def route_bins(obs: np.ndarray, offsets: np.ndarray, sizes: np.ndarray,
               u: np.ndarray) -> np.ndarray:
    """Map 1-based observations through a bin-splitting filter.

    Original bin i (1-based) becomes sizes[i-1] sub-bins starting at
    offsets[i-1] + 1; each observation is routed by its uniform u.
    """
    idx = obs.astype(np.int64) - 1
    sub = np.minimum((u * sizes[idx]).astype(np.int64), sizes[idx] - 1)
    return (offsets[idx] + sub + 1).astype(np.int64)
