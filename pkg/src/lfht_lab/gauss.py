"""Gaussian sequence model: product Gaussians with unit variance.

A spec is a finite truncation of the mean sequence; membership in the
smoothness ellipsoid is the weighted-norm check sum j^(2s) theta_j^2 <= C.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import ConstructionError, SampleKind


@dataclass(frozen=True)
class GaussianSequenceSpec:
    """Mean vector theta of length r, optional prior variances gamma."""

    theta: np.ndarray
    s: float
    c_sob: float
    gamma: np.ndarray | None = None

    def __post_init__(self):
        theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1:
            raise ConstructionError("theta must be a 1-D vector")
        if self.gamma is not None:
            gamma = np.ascontiguousarray(self.gamma, dtype=np.float64)
            if gamma.shape != theta.shape or np.any(gamma < 0):
                raise ConstructionError("gamma must be nonnegative, same length as theta")
            gamma.flags.writeable = False
            object.__setattr__(self, "gamma", gamma)

    @property
    def r(self) -> int:
        return int(self.theta.size)

    def sobolev_norm_sq(self) -> float:
        j = np.arange(1, self.r + 1, dtype=np.float64)
        return float(np.sum(j ** (2 * self.s) * self.theta**2))

    def in_ellipsoid(self) -> bool:
        return self.sobolev_norm_sq() <= self.c_sob + 1e-12

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.theta[None, :] + rng.standard_normal((n, self.r))

    @property
    def sample_kind(self) -> SampleKind:
        return SampleKind.SEQUENCE

    @property
    def dim(self) -> int:
        return self.r
