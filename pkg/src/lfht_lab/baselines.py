"""Comparison tests: set-counting, oracle likelihood ratio, censored and
geodesic robust tests, permutation p-values, error amplification, and the
problem reductions that convert testers into one another.

Decision convention everywhere: 0 means "Z came from the X source".
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dist import (
    ConstructionError,
    DiscretePmf,
    SampleKind,
    SampleSet,
    Source,
    sample,
)
from .l2 import ProjectionBasis
from .rng import derive_seed, generator

logger = logging.getLogger(__name__)


class DegenerateEstimates(ValueError):
    """Raised when density estimates coincide and a test needs them apart."""


@dataclass(frozen=True)
class DensityEstimatePair:
    """Density estimates for the two simulator sources, possibly smoothed."""

    phat_x: DiscretePmf
    phat_y: DiscretePmf
    smoothed: bool = False


def estimate_pair(
    x: SampleSet, y: SampleSet, k: int, beta_smooth: float | None = 0.5
) -> DensityEstimatePair:
    """Empirical pmfs with optional add-beta smoothing (default 1/2)."""

    def one(s: SampleSet) -> DiscretePmf:
        counts = np.bincount(s.observations, minlength=k + 1)[1:].astype(float)
        if beta_smooth:
            counts += beta_smooth
        total = counts.sum()
        if total <= 0:
            raise ConstructionError("cannot estimate from an empty sample")
        return DiscretePmf(weights=counts / total)

    return DensityEstimatePair(
        phat_x=one(x), phat_y=one(y), smoothed=bool(beta_smooth)
    )


def scheffe_test(est: DensityEstimatePair, z: SampleSet) -> int:
    """Count Z hits in the estimated acceptance set of the Y source."""
    s_mask = est.phat_y.weights >= est.phat_x.weights
    if np.all(s_mask):
        logger.info("degenerate decision set: estimates order the whole alphabet")
    frac = float(np.mean(s_mask[z.observations - 1])) if z.count else 0.0
    gamma = 0.5 * float(
        est.phat_x.weights[s_mask].sum() + est.phat_y.weights[s_mask].sum()
    )
    return 1 if frac >= gamma else 0


def np_oracle_test(px: DiscretePmf, py: DiscretePmf, z: SampleSet) -> int:
    """Likelihood-ratio test with the true pmfs.

    Observations in a one-sided support are decisive: the first one met
    settles the verdict regardless of the finite terms.
    """
    with np.errstate(divide="ignore"):
        log_ratio = np.log(px.weights) - np.log(py.weights)
    values = log_ratio[z.observations - 1]
    infinite = np.isinf(values)
    if np.any(infinite):
        first = values[infinite][0]
        return 0 if first > 0 else 1
    return 0 if math.fsum(values.tolist()) >= 0 else 1


# -- censored likelihood-ratio test --------------------------------------------


def _censor_low_residual(lr: np.ndarray, wx: np.ndarray, c1: float) -> float:
    mask = lr <= c1
    return float(np.sum(wx[mask] * (c1 - lr[mask])) / (1.0 + c1))


def _censor_high_residual(lr: np.ndarray, wx: np.ndarray, c2: float) -> float:
    # mirror of the low equation under (X <-> Y, c -> 1/c); the Y-side
    # expectation has been change-of-measured onto the X-side weights
    mask = lr >= c2
    return float(np.sum(wx[mask] * (lr[mask] - c2)) / (1.0 + c2))


def _bisect_log(fn, lo: float, hi: float, target: float, increasing: bool,
                iters: int = 200) -> float:
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        val = fn(mid)
        go_up = (val < target) if increasing else (val > target)
        if go_up:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-15:
            break
    return math.sqrt(lo * hi)


def solve_censor_levels(
    est: DensityEstimatePair, eps: float, bracket: tuple[float, float] = (1e-12, 1e12)
) -> tuple[float, float] | None:
    """Solve the two censoring-mass equations at level eps/3.

    Levels are on the likelihood-ratio scale L = phat_y / phat_x; c1 censors
    from below (X-favoring tail), c2 from above (Y-favoring tail).  The
    convention is the one symmetric under swapping the sources with
    c1 <-> 1/c2, so mirror-image estimates give c1 * c2 = 1.  Returns None
    when eps/3 exceeds the attainable censoring mass in the bracket.
    """
    wx, wy = est.phat_x.weights, est.phat_y.weights
    if np.any(wx <= 0) or np.any(wy <= 0):
        raise ConstructionError("censored test needs strictly positive estimates")
    lr = wy / wx
    target = eps / 3.0
    lo, hi = bracket
    if _censor_low_residual(lr, wx, hi) < target or _censor_high_residual(
        lr, wx, lo
    ) < target:
        return None
    c1 = _bisect_log(
        lambda c: _censor_low_residual(lr, wx, c), lo, hi, target, increasing=True
    )
    c2 = _bisect_log(
        lambda c: _censor_high_residual(lr, wx, c), lo, hi, target, increasing=False
    )
    return c1, c2


def huber_test(est: DensityEstimatePair, z: SampleSet, eps: float) -> int:
    """Censored log-likelihood-ratio test.

    The clamp window comes from the two censoring equations; the convention
    keeps the test symmetric under swapping the sources with c1 <-> 1/c2.
    Falls back to the plain likelihood-ratio test on the estimates when the
    equations have no root in the bracket.
    """
    levels = solve_censor_levels(est, eps)
    if levels is None or levels[0] >= levels[1]:
        # either no root in the bracket or the two censor levels crossed:
        # the estimates do not disagree enough to absorb eps/3 on each side
        logger.warning("censoring mass unattainable at eps=%g; falling back", eps)
        return np_oracle_test(est.phat_x, est.phat_y, z)
    c1, c2 = levels
    lr = est.phat_y.weights / est.phat_x.weights
    scores = -np.log(np.clip(lr, c1, c2))
    total = float(np.sum(scores[z.observations - 1]))
    return 0 if total >= 0 else 1


def birge_test(est: DensityEstimatePair, z: SampleSet) -> int:
    """Test along the constant-speed great-circle arc between root-densities."""
    rx = np.sqrt(est.phat_x.weights)
    ry = np.sqrt(est.phat_y.weights)
    cos_omega = float(np.clip(np.dot(rx, ry), -1.0, 1.0))
    omega = math.acos(cos_omega)
    if omega == 0.0:
        raise DegenerateEstimates("estimates coincide; the arc is a point")

    def gamma(t: float) -> np.ndarray:
        return (math.sin((1 - t) * omega) * rx + math.sin(t * omega) * ry) / math.sin(
            omega
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        scores = 2.0 * (np.log(gamma(1 / 3)) - np.log(gamma(2 / 3)))
    total = float(np.sum(scores[z.observations - 1]))
    if math.isnan(total):
        raise DegenerateEstimates("arc vanishes on bins carrying Z observations")
    return 0 if total >= 0 else 1


def birge_arc_point(est: DensityEstimatePair, t: float) -> np.ndarray:
    """Unit vector at parameter t of the arc (exposed for auditing)."""
    rx = np.sqrt(est.phat_x.weights)
    ry = np.sqrt(est.phat_y.weights)
    omega = math.acos(float(np.clip(np.dot(rx, ry), -1.0, 1.0)))
    if omega == 0.0:
        raise DegenerateEstimates("estimates coincide; the arc is a point")
    return (math.sin((1 - t) * omega) * rx + math.sin(t * omega) * ry) / math.sin(omega)


# -- permutation p-value ---------------------------------------------------------


@dataclass(frozen=True)
class PValueReport:
    p_value: float
    t_obs: float
    permutations: int


def permutation_pvalue(
    x: SampleSet,
    y: SampleSet,
    z: SampleSet,
    permutations: int,
    seed: int,
    basis: ProjectionBasis | None = None,
) -> PValueReport:
    """Pooled-shuffle p-value for the L2-difference statistic.

    The pooled X-and-Z sample is reshuffled (sizes preserved, Y fixed); the
    p-value is the upper-tail rank of the observed statistic, exchangeable
    under the null.
    """
    if permutations < 19:
        raise ConstructionError("need at least 19 permutations")
    if x.kind is not SampleKind.DISCRETE:
        raise ConstructionError("permutation p-values need discrete or binned samples")
    k = basis.k if basis is not None else max(x.dim, y.dim, z.dim)
    n, m = x.count, z.count
    pooled = np.concatenate([x.observations, z.observations])
    rng = generator(derive_seed(seed, "perm"))
    tiled = np.tile(pooled, (permutations, 1))
    shuffled = rng.permuted(tiled, axis=1)
    cy = kernels.batch_counts(y.observations[None, :], k)
    cy_rep = np.repeat(cy, permutations, axis=0)
    cx = kernels.batch_counts(shuffled[:, :n], k)
    cz = kernels.batch_counts(shuffled[:, n:], k)
    perm_nums = kernels.l2_diff_numerator(cx, cy_rep, cz, n, m)
    cx0 = kernels.batch_counts(x.observations[None, :], k)
    cz0 = kernels.batch_counts(z.observations[None, :], k)
    obs_num = int(kernels.l2_diff_numerator(cx0, cy, cz0, n, m)[0])
    exceed = int(np.sum(perm_nums >= obs_num))
    scale = float(n * n) * float(m * m)
    return PValueReport(
        p_value=(1 + exceed) / (permutations + 1),
        t_obs=obs_num / scale,
        permutations=permutations,
    )


# -- error amplification and reductions ------------------------------------------


def majority_vote(test, splits: int, x: SampleSet, y: SampleSet, z: SampleSet) -> int:
    """Run the test on disjoint equal sub-samples and take the majority."""
    if splits < 1 or splits % 2 == 0:
        raise ConstructionError("splits must be odd and positive")
    bx, by, bz = x.count // splits, y.count // splits, z.count // splits
    if min(bx, by) < 2 or bz < 1:
        raise ConstructionError("not enough samples for the requested splits")
    votes = 0
    for i in range(splits):
        votes += test(
            x.take(i * bx, (i + 1) * bx),
            y.take(i * by, (i + 1) * by),
            z.take(i * bz, (i + 1) * bz),
        )
    return 1 if 2 * votes > splits else 0


def gof_via_lfht(
    test, x: SampleSet, p0, n: int, m: int, seed: int
) -> int:
    """Goodness-of-fit wrapper: batches of X against fresh null samples.

    Each odd batch is scored against the next batch's prefix; under the null
    the paired difference has mean zero, so the mean is thresholded at 1/6.
    """
    if m > n:
        raise ConstructionError("wrapper needs m <= n")
    c = x.count // n
    if c < 2:
        raise ConstructionError("need at least two batches")
    diffs = []
    for i in range(0, c - 1, 2):
        xi = x.take(i * n, (i + 1) * n)
        xnext = x.take((i + 1) * n, (i + 1) * n + m, source=Source.Z)
        yi = sample(p0, n, derive_seed(seed, "gof-y", i), source=Source.Y)
        zi = sample(p0, m, derive_seed(seed, "gof-z", i), source=Source.Z)
        diffs.append(test(xi, yi, zi) - test(xi, yi, xnext))
    return 1 if float(np.mean(diffs)) >= 1.0 / 6.0 else 0


def ts_via_lfht(test, x: SampleSet, y: SampleSet, n: int, m: int) -> int:
    """Two-sample wrapper: antisymmetrized batch scores thresholded at 1/6."""
    cx = x.count // n
    cy = y.count // m
    c = min(cx, cy)
    if c < 2 or m < n:
        raise ConstructionError("need two batches and m >= n")
    diffs = []
    for i in range(0, c - 1, 2):
        xi = x.take(i * n, (i + 1) * n)
        yi_head = y.take(i * m, i * m + n, source=Source.Y)
        y_next = y.take((i + 1) * m, (i + 2) * m, source=Source.Z)
        first = test(xi, yi_head, y_next)
        swapped = test(
            SampleSet(Source.X, yi_head.kind, yi_head.dim, yi_head.observations),
            SampleSet(Source.Y, xi.kind, xi.dim, xi.observations),
            y_next,
        )
        diffs.append(first - swapped)
    return 1 if float(np.mean(diffs)) >= 1.0 / 6.0 else 0


def lfht_via_ts(ts_test, x: SampleSet, y: SampleSet, z: SampleSet) -> int:
    """Discard Y and ask the two-sample test whether X and Z agree."""
    del y
    return ts_test(x, z)
