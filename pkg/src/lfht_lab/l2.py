"""The L2-difference test engine.

The statistic compares squared L2 distances between empirical projections:
T = ||proj(X) - proj(Z)||^2 - ||proj(Y) - proj(Z)||^2, with an optional
diagonal correction that vanishes identically for indicator bases.  The exact
mean and a five-term variance bound are available as an oracle; class
dispatch covers bounded discrete, smooth (via histogram binning), Gaussian
sequence (via coordinate truncation), and unbounded discrete alphabets (via
the flattening filter plus a norm-estimate early exit).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .adversarial import ClassTag
from .bump import SmoothBumpDensity
from .dist import (
    ConstructionError,
    DiscretePmf,
    SampleKind,
    SampleSet,
    Source,
    bin_cube_sample,
)
from .gauss import GaussianSequenceSpec
from .rng import derive_seed, generator

logger = logging.getLogger(__name__)


class BasisKind(Enum):
    DISCRETE_IDENTITY = "discrete"
    CUBE_HISTOGRAM = "histogram"
    GAUSSIAN_COORDINATES = "gaussian"


@dataclass(frozen=True)
class ProjectionBasis:
    kind: BasisKind
    k: int | None = None
    kappa: int | None = None
    d: int | None = None
    r_trunc: int | None = None

    @property
    def r(self) -> int:
        if self.kind is BasisKind.DISCRETE_IDENTITY:
            return self.k
        if self.kind is BasisKind.CUBE_HISTOGRAM:
            return self.kappa**self.d
        return self.r_trunc


def identity_basis(k: int) -> ProjectionBasis:
    return ProjectionBasis(kind=BasisKind.DISCRETE_IDENTITY, k=k)


def histogram_basis(kappa: int, d: int) -> ProjectionBasis:
    return ProjectionBasis(kind=BasisKind.CUBE_HISTOGRAM, kappa=kappa, d=d)


def gaussian_basis(r: int) -> ProjectionBasis:
    return ProjectionBasis(kind=BasisKind.GAUSSIAN_COORDINATES, r_trunc=r)


@dataclass(frozen=True)
class StatReport:
    t_lf: float
    t_lf_nodiag: float
    diagonal: float
    decision: int
    basis: ProjectionBasis
    extras: dict = field(default_factory=dict)


def _decide(statistic: float) -> int:
    # sign test with ties broken toward the null
    return 1 if statistic > 0 else 0


def empirical_projection(s: SampleSet, basis: ProjectionBasis) -> np.ndarray:
    """Coefficient vector of the sample's empirical projection."""
    if basis.kind is BasisKind.DISCRETE_IDENTITY:
        if s.kind is not SampleKind.DISCRETE or s.dim > basis.k:
            raise ConstructionError("sample does not fit the identity basis")
        counts = np.bincount(s.observations, minlength=basis.k + 1)[1:]
        return counts / max(s.count, 1)
    if basis.kind is BasisKind.CUBE_HISTOGRAM:
        if s.kind is SampleKind.CUBE:
            s = bin_cube_sample(s, basis.kappa)
        if s.kind is not SampleKind.DISCRETE or s.dim != basis.r:
            raise ConstructionError("sample does not fit the histogram basis")
        counts = np.bincount(s.observations, minlength=basis.r + 1)[1:]
        return basis.kappa ** (basis.d / 2) * counts / max(s.count, 1)
    if s.kind is not SampleKind.SEQUENCE or s.dim < basis.r_trunc:
        raise ConstructionError("sample does not fit the coordinate basis")
    return s.observations[:, : basis.r_trunc].mean(axis=0)


def t_lf(
    x: SampleSet,
    y: SampleSet,
    z: SampleSet,
    basis: ProjectionBasis,
    use_diagonal: bool = False,
) -> StatReport:
    """Difference of squared L2 distances between empirical projections.

    Decision 0 declares the null (Z from the X source); ties go to 0.
    """
    n = x.count
    if y.count != n or n < 2:
        raise ConstructionError("need X and Y of equal size n >= 2")
    if z.count < 1:
        raise ConstructionError("need at least one Z observation")
    ax = empirical_projection(x, basis)
    ay = empirical_projection(y, basis)
    az = empirical_projection(z, basis)
    total = float(np.sum((ax - az) ** 2) - np.sum((ay - az) ** 2))
    if basis.kind is BasisKind.GAUSSIAN_COORDINATES:
        r = basis.r_trunc
        diagonal = float(
            (
                np.sum(x.observations[:, :r] ** 2)
                - np.sum(y.observations[:, :r] ** 2)
            )
            / n**2
        )
    else:
        diagonal = 0.0
    nodiag = total - diagonal
    statistic = total if use_diagonal else nodiag
    return StatReport(
        t_lf=total,
        t_lf_nodiag=nodiag,
        diagonal=diagonal,
        decision=_decide(statistic),
        basis=basis,
    )


# -- exact mean and variance-bound oracle --------------------------------------


@dataclass(frozen=True)
class MeanVarBound:
    mean: float
    var_terms: dict
    var_bound: float


class _DiagonalMoments:
    """Moment view of a density in an indicator basis with height tau.

    coef[i] is the projection coefficient tau * mass_i; all cross-moments of
    basis functions are diagonal, so the oracle quantities reduce to sums.
    """

    def __init__(self, coef: np.ndarray, tau_sq: float):
        self.coef = coef
        self.tau_sq = tau_sq

    def a_quantity(self, v: np.ndarray, t: np.ndarray) -> float:
        tau = math.sqrt(self.tau_sq)
        return float(np.sum((v - t) ** 2 * tau * self.coef))

    def b_quantity(self, other: "_DiagonalMoments") -> float:
        return float(self.tau_sq * np.sum(self.coef * other.coef))


class _GaussianMoments:
    def __init__(self, theta: np.ndarray):
        self.coef = theta

    def a_quantity(self, v: np.ndarray, t: np.ndarray) -> float:
        delta = v - t
        return float(np.sum(delta**2) + np.dot(self.coef, delta) ** 2)

    def b_quantity(self, other: "_GaussianMoments") -> float:
        r = self.coef.size
        inner = float(np.dot(self.coef, other.coef))
        return float(
            r + np.sum(self.coef**2) + np.sum(other.coef**2) + inner**2
        )


def _moment_view(density, basis: ProjectionBasis):
    if basis.kind is BasisKind.DISCRETE_IDENTITY:
        if not isinstance(density, DiscretePmf) or density.k != basis.k:
            raise ConstructionError("oracle needs pmfs on the basis alphabet")
        return _DiagonalMoments(density.weights.astype(np.float64), 1.0)
    if basis.kind is BasisKind.CUBE_HISTOGRAM:
        if not isinstance(density, SmoothBumpDensity):
            raise ConstructionError("histogram oracle needs bump densities")
        masses = density.cell_masses(basis.kappa)
        tau_sq = float(basis.kappa**basis.d)
        return _DiagonalMoments(math.sqrt(tau_sq) * masses, tau_sq)
    if not isinstance(density, GaussianSequenceSpec) or density.r < basis.r_trunc:
        raise ConstructionError("coordinate oracle needs specs of length >= r")
    return _GaussianMoments(density.theta[: basis.r_trunc].astype(np.float64))


def _l2sq_of_sum(f, g, h, basis: ProjectionBasis) -> float:
    """||f+g+h||_2^2 in the basis' base measure (exact or quadrature)."""
    if basis.kind is BasisKind.DISCRETE_IDENTITY:
        return float(np.sum((f.weights + g.weights + h.weights) ** 2))
    if basis.kind is BasisKind.CUBE_HISTOGRAM:
        from .bump import quad_integrate

        return quad_integrate(
            f,
            lambda p: (f.density(p) + g.density(p) + h.density(p)) ** 2,
            order=12,
        )
    thetas = [f.theta, g.theta, h.theta]
    return float(
        sum(math.exp(float(np.dot(ta, tb))) for ta in thetas for tb in thetas)
    )


def mean_var_oracle(
    f, g, h, n: int, m: int, basis: ProjectionBasis, multiplier: float = 100.0
) -> MeanVarBound:
    """Exact mean of the no-diagonal statistic and its variance-bound terms.

    The mean is ||P(f-h)||^2 - ||P(g-h)||^2 + (||Pg||^2 - ||Pf||^2)/n; the
    variance bound collects the five coefficient groups (1/n, 1/m, 1/nm,
    1/n^2, 1/n^3) built from the A and B quantities, scaled by `multiplier`
    since the underlying inequality only fixes the terms up to a universal
    constant.
    """
    vf, vg, vh = (_moment_view(u, basis) for u in (f, g, h))
    cf, cg, ch = vf.coef, vg.coef, vh.coef
    mean = float(
        np.sum((cf - ch) ** 2)
        - np.sum((cg - ch) ** 2)
        + (np.sum(cg**2) - np.sum(cf**2)) / n
    )
    zero = np.zeros_like(cf)
    a_ffh = vf.a_quantity(cf, ch)
    a_ggh = vg.a_quantity(cg, ch)
    a_hfg = vh.a_quantity(cf, cg)
    a_ff0 = vf.a_quantity(cf, zero)
    a_gg0 = vg.a_quantity(cg, zero)
    b_ff = abs(vf.b_quantity(vf))
    b_gg = abs(vg.b_quantity(vg))
    b_fh = abs(vf.b_quantity(vh))
    b_gh = abs(vg.b_quantity(vh))
    sum_norm4 = _l2sq_of_sum(f, g, h, basis) ** 2
    var_terms = {
        "1/n": a_ffh + a_ggh,
        "1/m": a_hfg,
        "1/nm": sum_norm4 + b_fh + b_gh,
        "1/n^2": b_ff + b_gg + sum_norm4 + math.sqrt(a_ff0 * a_ffh + a_gg0 * a_ggh),
        "1/n^3": b_ff + b_gg + sum_norm4 + a_ff0 + a_gg0,
    }
    var_bound = multiplier * (
        var_terms["1/n"] / n
        + var_terms["1/m"] / m
        + var_terms["1/nm"] / (n * m)
        + var_terms["1/n^2"] / n**2
        + var_terms["1/n^3"] / n**3
    )
    return MeanVarBound(mean=mean, var_terms=var_terms, var_bound=var_bound)


# -- class-dispatched tests ----------------------------------------------------


@dataclass(frozen=True)
class ClassConfig:
    tag: ClassTag
    eps: float
    k: int | None = None
    beta: float | None = None
    d: int | None = None
    s: float | None = None
    c_sob: float | None = None
    c_kappa: float = 1.0
    use_diagonal: bool = False
    flatten_threshold: float = 4.0


def smooth_resolution(eps: float, beta: float, c_kappa: float = 1.0) -> int:
    return max(1, math.ceil(c_kappa * eps ** (-1.0 / beta)))


def gaussian_truncation(eps: float, s: float, c_sob: float) -> int:
    return max(1, math.ceil((4.0 * c_sob / eps) ** (1.0 / s)))


def lfht_test(
    x: SampleSet, y: SampleSet, z: SampleSet, cfg: ClassConfig, seed: int | None = None
) -> StatReport:
    """Class-dispatched L2-difference test.

    Bounded/unbounded discrete uses the identity basis directly; the smooth
    class bins the cube at the eps-matched resolution first; the Gaussian
    class compares truncated coordinate means.
    """
    if cfg.tag in (ClassTag.P_DB, ClassTag.P_D):
        k = cfg.k or max(x.dim, y.dim, z.dim)
        return t_lf(x, y, z, identity_basis(k), use_diagonal=cfg.use_diagonal)
    if cfg.tag is ClassTag.P_H:
        kappa = smooth_resolution(cfg.eps, cfg.beta, cfg.c_kappa)
        basis = histogram_basis(kappa, cfg.d)
        return t_lf(x, y, z, basis, use_diagonal=cfg.use_diagonal)
    if cfg.tag is ClassTag.P_G:
        r = gaussian_truncation(cfg.eps, cfg.s, cfg.c_sob)
        r = min(r, x.dim)
        return t_lf(x, y, z, gaussian_basis(r), use_diagonal=cfg.use_diagonal)
    raise ConstructionError(f"unknown class tag {cfg.tag}")


# -- flattening filter for the unbounded discrete class -------------------------


@dataclass(frozen=True)
class FlattenFilter:
    """Realized bin-splitting filter: bin i becomes sizes[i-1] sub-bins."""

    sizes: np.ndarray
    offsets: np.ndarray
    big_k: int

    def pushforward(self, pmf: DiscretePmf) -> DiscretePmf:
        weights = np.repeat(pmf.weights / self.sizes, self.sizes)
        return DiscretePmf(weights=weights)

    def route(self, obs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(obs.shape[0])
        return kernels.route_bins(
            obs.astype(np.int64), self.offsets, self.sizes, u
        )


@dataclass(frozen=True)
class FlattenResult:
    aborted: bool
    x: SampleSet | None = None
    y: SampleSet | None = None
    z: SampleSet | None = None
    filter: FlattenFilter | None = None
    consumed: dict = field(default_factory=dict)


def flatten(
    x: SampleSet, y: SampleSet, z: SampleSet, k: int, seed: int
) -> FlattenResult:
    """Randomized alphabet-splitting filter.

    Spends Poisson-sized prefixes of each sample to choose per-bin split
    counts, then re-maps the untouched remainder uniformly over sub-bins.
    Aborts (exponentially rarely) when a Poisson draw overruns its sample or
    the inflated alphabet would exceed 5k/2.
    """
    rng = generator(derive_seed(seed, "flatten"))
    budgets = {
        "x": 0.5 * min(x.count, k),
        "y": 0.5 * min(y.count, k),
        "z": 0.5 * min(z.count, k),
    }
    draws = {key: int(rng.poisson(b / 2.0)) for key, b in budgets.items()}
    if draws["x"] > x.count or draws["y"] > y.count or draws["z"] > z.count:
        return FlattenResult(aborted=True, consumed=draws)
    counts = np.zeros(k, dtype=np.int64)
    for key, s in (("x", x), ("y", y), ("z", z)):
        head = s.observations[: draws[key]]
        counts += np.bincount(head, minlength=k + 1)[1:]
    sizes = 1 + counts
    big_k = int(sizes.sum())
    if big_k > (5 * k) // 2:
        return FlattenResult(aborted=True, consumed=draws)
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    filt = FlattenFilter(sizes=sizes, offsets=offsets, big_k=big_k)

    def remap(s: SampleSet, used: int, source: Source) -> SampleSet:
        rest = s.observations[used:]
        return SampleSet(
            source=source,
            kind=SampleKind.DISCRETE,
            dim=big_k,
            observations=filt.route(rest, rng),
        )

    return FlattenResult(
        aborted=False,
        x=remap(x, draws["x"], Source.X),
        y=remap(y, draws["y"], Source.Y),
        z=remap(z, draws["z"], Source.Z),
        filter=filt,
        consumed=draws,
    )


def norm_estimate(s: SampleSet) -> float:
    """Collision estimate of the squared L2 norm, clamped below at 1/K."""
    t = s.count
    if t < 2:
        raise ConstructionError("norm estimation needs at least two observations")
    counts = np.bincount(s.observations, minlength=s.dim + 1)[1:]
    pairs = int(kernels.collision_pairs(counts[None, :])[0])
    return max(pairs / (t * (t - 1) / 2), 1.0 / s.dim)


def lfht_test_pd(
    x: SampleSet,
    y: SampleSet,
    z: SampleSet,
    k: int,
    eps: float,
    seed: int,
    threshold_c: float = 4.0,
) -> StatReport:
    """Flattening pipeline for unrestricted discrete distributions.

    Flatten on half budgets, spend a quarter of each transformed simulation
    sample on norm estimates with an early-exit threshold, then run the
    L2-difference test on what remains.  A filter abort falls back to a
    seed-derived fair coin with a logged warning.
    """
    n, m = x.count, z.count
    basis_note: dict = {"consumed": None}
    result = flatten(x, y, z, k, seed)
    basis_note["consumed"] = result.consumed
    if result.aborted:
        coin = generator(derive_seed(seed, "abort-coin")).integers(0, 2)
        logger.warning("flattening filter aborted; deciding by fair coin")
        return StatReport(
            t_lf=math.nan,
            t_lf_nodiag=math.nan,
            diagonal=0.0,
            decision=int(coin),
            basis=identity_basis(k),
            extras={"aborted": True, **basis_note},
        )
    big_k = result.filter.big_k
    slice_x = result.x.count // 4
    slice_y = result.y.count // 4
    threshold = 1.5 * threshold_c**2 / min(max(n, m), k)
    basis = identity_basis(big_k)
    if slice_x >= 2 and slice_y >= 2:
        est_x = norm_estimate(result.x.take(0, slice_x))
        est_y = norm_estimate(result.y.take(0, slice_y))
        basis_note.update(
            {"norm_est_x": est_x, "norm_est_y": est_y, "threshold": threshold,
             "norm_slice": (slice_x, slice_y)}
        )
        if est_x > threshold:
            return StatReport(
                t_lf=math.nan, t_lf_nodiag=math.nan, diagonal=0.0, decision=1,
                basis=basis, extras={"early_exit": "x-norm", **basis_note},
            )
        if est_y > threshold:
            return StatReport(
                t_lf=math.nan, t_lf_nodiag=math.nan, diagonal=0.0, decision=0,
                basis=basis, extras={"early_exit": "y-norm", **basis_note},
            )
    x_test = result.x.take(slice_x, result.x.count)
    y_test = result.y.take(slice_y, result.y.count)
    n_common = min(x_test.count, y_test.count)
    if n_common < 2 or result.z.count < 1:
        coin = generator(derive_seed(seed, "starved-coin")).integers(0, 2)
        logger.warning("flattened pipeline starved of samples; fair coin")
        return StatReport(
            t_lf=math.nan, t_lf_nodiag=math.nan, diagonal=0.0,
            decision=int(coin), basis=basis,
            extras={"starved": True, **basis_note},
        )
    report = t_lf(
        x_test.take(0, n_common),
        y_test.take(0, n_common),
        result.z,
        basis,
    )
    return StatReport(
        t_lf=report.t_lf,
        t_lf_nodiag=report.t_lf_nodiag,
        diagonal=report.diagonal,
        decision=report.decision,
        basis=basis,
        extras=basis_note,
    )
