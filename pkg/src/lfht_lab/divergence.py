"""Closed-form divergences between discrete pmfs and product Gaussians.

KL and chi-square return +inf when absolute continuity fails; adversarial
constructions produce disjoint supports on purpose, so this is not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import ConstructionError, DiscretePmf


def _aligned(p: DiscretePmf, q: DiscretePmf) -> tuple[np.ndarray, np.ndarray]:
    if p.k != q.k:
        raise ConstructionError("divergence requires a shared alphabet")
    return p.weights, q.weights


def tv(p: DiscretePmf, q: DiscretePmf) -> float:
    """Total variation: half the L1 distance."""
    pw, qw = _aligned(p, q)
    return 0.5 * float(np.abs(pw - qw).sum())


def hellinger(p: DiscretePmf, q: DiscretePmf) -> float:
    """Hellinger distance H, with H^2 = sum (sqrt p - sqrt q)^2."""
    pw, qw = _aligned(p, q)
    return float(np.sqrt(np.sum((np.sqrt(pw) - np.sqrt(qw)) ** 2)))


def kl(p: DiscretePmf, q: DiscretePmf) -> float:
    """KL divergence with 0*log(0/0)=0; +inf when q_i=0 < p_i."""
    pw, qw = _aligned(p, q)
    support = pw > 0
    if np.any(qw[support] == 0):
        return math.inf
    ps = pw[support]
    return float(np.sum(ps * np.log(ps / qw[support])))


def chi2(p: DiscretePmf, q: DiscretePmf) -> float:
    """Chi-square divergence sum (p-q)^2/q; +inf when q_i=0 != p_i."""
    pw, qw = _aligned(p, q)
    zero_q = qw == 0
    if np.any(pw[zero_q] != 0):
        return math.inf
    keep = ~zero_q
    return float(np.sum((pw[keep] - qw[keep]) ** 2 / qw[keep]))


def hellinger_tensorized_sq(h2: float, m: int) -> float:
    """H^2 between m-fold products from the single-copy H^2."""
    return 2.0 - 2.0 * (1.0 - 0.5 * h2) ** m


@dataclass(frozen=True)
class GaussianDivergences:
    """Divergences between product Gaussians with identity covariance.

    TV has no closed form; (tv_lower, tv_upper) is a certified bracket from
    the standard divergence chain plus the min{1, dist/200} lower bound.
    """

    tv_lower: float
    tv_upper: float
    hellinger: float
    kl: float
    chi2: float


def gaussian_divergences(theta, theta2) -> GaussianDivergences:
    """Exact closed forms for N(theta, I) vs N(theta2, I)."""
    t1 = np.asarray(theta, dtype=np.float64)
    t2 = np.asarray(theta2, dtype=np.float64)
    if t1.shape != t2.shape:
        r = max(t1.size, t2.size)
        t1 = np.pad(t1, (0, r - t1.size))
        t2 = np.pad(t2, (0, r - t2.size))
    dist_sq = float(np.sum((t1 - t2) ** 2))
    h_sq = 2.0 * (1.0 - math.exp(-dist_sq / 8.0))
    kl_val = dist_sq / 2.0
    chi2_val = math.expm1(dist_sq)
    h = math.sqrt(h_sq)
    tv_lower = max(0.5 * h_sq, min(1.0, math.sqrt(dist_sq) / 200.0))
    tv_upper = min(1.0, h)
    return GaussianDivergences(
        tv_lower=tv_lower, tv_upper=tv_upper, hellinger=h, kl=kl_val, chi2=chi2_val
    )
