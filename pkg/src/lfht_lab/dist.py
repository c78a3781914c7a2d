"""Distribution representations, samplers, and empirical estimators.

Discrete pmfs live on the 1-based alphabet {1, ..., k}; points of the smooth
family live in the unit cube; Gaussian sequence observations are length-r
coordinate vectors.  All types are immutable after construction and all
sampling is a pure function of (distribution, n, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import generator


class ConstructionError(ValueError):
    """Raised when a distribution or instance cannot be built as requested."""


class Source(Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


class SampleKind(Enum):
    DISCRETE = "discrete"
    CUBE = "cube"
    SEQUENCE = "sequence"


@dataclass(frozen=True)
class DiscretePmf:
    """Probability mass function on {1, ..., k}.

    weights always sum to 1 (renormalized at construction; the raw sum is
    kept in original_sum).
    """

    weights: np.ndarray
    original_sum: float = 1.0

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ConstructionError("weights must be a nonempty 1-D vector")
        if np.any(w < 0):
            raise ConstructionError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConstructionError("weights must sum to 1 within 1e-12")

    @property
    def k(self) -> int:
        return int(self.weights.size)

    def max_weight(self) -> float:
        return float(self.weights.max())

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        u = rng.random(n)
        return (np.searchsorted(cdf, u, side="right") + 1).astype(np.int64)

    @property
    def sample_kind(self) -> SampleKind:
        return SampleKind.DISCRETE

    @property
    def dim(self) -> int:
        return self.k


@dataclass(frozen=True)
class BoundedDiscreteTag:
    """Membership tag for the bounded discrete class: all weights <= C/k."""

    c_bound: float

    def __post_init__(self):
        if not self.c_bound > 1:
            raise ConstructionError("C bound must exceed 1")

    def check(self, pmf: DiscretePmf) -> bool:
        return bool(pmf.max_weight() <= self.c_bound / pmf.k + 1e-15)


def make_discrete_pmf(weights) -> DiscretePmf:
    """Normalize nonnegative weights into a DiscretePmf.

    Rejects negative entries and the all-zero vector; records the raw sum.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ConstructionError("weights must be a nonempty 1-D vector")
    if np.any(w < 0):
        raise ConstructionError("weights must be nonnegative")
    total = float(w.sum())
    if total <= 0:
        raise ConstructionError("at least one weight must be positive")
    return DiscretePmf(weights=w / total, original_sum=total)


def uniform_pmf(k: int) -> DiscretePmf:
    return DiscretePmf(weights=np.full(k, 1.0 / k))


@dataclass(frozen=True)
class SampleSet:
    """i.i.d. observations from a single source.

    observations is a (count,) int64 array of 1-based bins for DISCRETE,
    a (count, d) float64 array in [0,1]^d for CUBE, and a (count, r) float64
    array for SEQUENCE.  dim is k, d, or r respectively.
    """

    source: Source
    kind: SampleKind
    dim: int
    observations: np.ndarray

    def __post_init__(self):
        obs = np.ascontiguousarray(self.observations)
        if self.kind is SampleKind.DISCRETE:
            obs = obs.astype(np.int64, copy=False)
            if obs.ndim != 1:
                raise ConstructionError("discrete observations must be 1-D")
            if obs.size and (obs.min() < 1 or obs.max() > self.dim):
                raise ConstructionError("discrete observations must lie in [1, k]")
        else:
            obs = obs.astype(np.float64, copy=False)
            if obs.ndim != 2 or (obs.size and obs.shape[1] != self.dim):
                raise ConstructionError("observations must have shape (count, dim)")
            if self.kind is SampleKind.CUBE and obs.size and (
                obs.min() < 0.0 or obs.max() > 1.0
            ):
                raise ConstructionError("cube points must lie in [0, 1]^d")
        obs.flags.writeable = False
        object.__setattr__(self, "observations", obs)

    @property
    def count(self) -> int:
        return int(self.observations.shape[0])

    def take(self, start: int, stop: int, source: Source | None = None) -> "SampleSet":
        return SampleSet(
            source=source or self.source,
            kind=self.kind,
            dim=self.dim,
            observations=self.observations[start:stop],
        )


def sample(dist, n: int, seed: int, source: Source = Source.X) -> SampleSet:
    """Draw n i.i.d. observations; identical (dist, n, seed) -> identical output."""
    if n < 0:
        raise ConstructionError("sample size must be nonnegative")
    rng = generator(seed)
    obs = dist._draw(n, rng)
    return SampleSet(source=source, kind=dist.sample_kind, dim=dist.dim, observations=obs)


def empirical_pmf(s: SampleSet, k: int | None = None) -> DiscretePmf:
    """Bin counts / count for a discrete sample."""
    if s.kind is not SampleKind.DISCRETE:
        raise ConstructionError("empirical pmf requires a discrete sample")
    if s.count == 0:
        raise ConstructionError("empirical pmf of an empty sample is undefined")
    k = k or s.dim
    counts = np.bincount(s.observations, minlength=k + 1)[1:]
    return DiscretePmf(weights=counts / s.count)


def cell_coords(points: np.ndarray, kappa: int) -> np.ndarray:
    """0-based per-axis cell coordinates; cells are half-open, top face closed."""
    return np.minimum((points * kappa).astype(np.int64), kappa - 1)


def flat_cell_index(coords: np.ndarray, kappa: int, d: int) -> np.ndarray:
    """1-based flat index with axis 0 varying fastest."""
    strides = kappa ** np.arange(d, dtype=np.int64)
    return 1 + coords @ strides


def bin_cube_sample(s: SampleSet, kappa: int) -> SampleSet:
    """Map cube points to the 1-based indices of their regular-grid cells."""
    if s.kind is not SampleKind.CUBE:
        raise ConstructionError("binning requires a cube sample")
    d = s.dim
    coords = cell_coords(s.observations, kappa) if s.count else np.zeros((0, d), np.int64)
    return SampleSet(
        source=s.source,
        kind=SampleKind.DISCRETE,
        dim=int(kappa**d),
        observations=flat_cell_index(coords, kappa, d),
    )
