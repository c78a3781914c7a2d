"""Numba-jitted kernels, mirror images of the numpy backend.

Integer accumulators keep results bitwise identical to the numpy path.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def batch_counts(obs, k):
    t, n = obs.shape
    out = np.zeros((t, k), dtype=np.int64)
    for i in range(t):
        for j in range(n):
            out[i, obs[i, j] - 1] += 1
    return out


@njit(cache=True)
def l2_diff_numerator(cx, cy, cz, n, m):
    t, k = cx.shape
    out = np.empty(t, dtype=np.int64)
    for i in range(t):
        acc = np.int64(0)
        for j in range(k):
            dx = m * cx[i, j] - n * cz[i, j]
            dy = m * cy[i, j] - n * cz[i, j]
            acc += dx * dx - dy * dy
        out[i] = acc
    return out


@njit(cache=True)
def collision_pairs(counts):
    t, k = counts.shape
    out = np.empty(t, dtype=np.int64)
    for i in range(t):
        acc = np.int64(0)
        for j in range(k):
            c = counts[i, j]
            acc += c * (c - 1) // 2
        out[i] = acc
    return out


@njit(cache=True)
def route_bins(obs, offsets, sizes, u):
    n = obs.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        idx = obs[i] - 1
        sub = np.int64(u[i] * sizes[idx])
        if sub >= sizes[idx]:
            sub = sizes[idx] - 1
        out[i] = offsets[idx] + sub + 1
    return out
