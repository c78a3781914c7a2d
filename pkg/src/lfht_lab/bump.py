"""Parametric smooth densities on the unit cube: base profile plus sign bumps.

The density is base(x) + rho * sum_j eta_j h_j(x), where h_j is a windowed
sine bump translated and scaled into cell j of the regular kappa-grid.  The
1-d profile is g(u) = A (sin(2 pi u)/2 - sin(4 pi u)/4), which vanishes to
second order at the cell border, integrates to zero, and has unit L2 norm
after scaling by A = sqrt(32/5).  Its antiderivative is elementary, so every
cell mass at any resolution is available in closed form; that is what makes
grid projections and the separation audits exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .dist import (
    ConstructionError,
    DiscretePmf,
    SampleKind,
    cell_coords,
)

PROFILE_AMP = math.sqrt(32.0 / 5.0)
PROFILE_SUP_1D = PROFILE_AMP * 3.0 * math.sqrt(3.0) / 8.0
PROFILE_L1_1D = PROFILE_AMP / math.pi
PROFILE_NAME = "windowed-sine"


def profile(u: np.ndarray) -> np.ndarray:
    """1-d bump shape on [0, 1]; zero integral, unit L2 norm."""
    return PROFILE_AMP * (
        0.5 * np.sin(2 * np.pi * u) - 0.25 * np.sin(4 * np.pi * u)
    )


def profile_antideriv(u: np.ndarray) -> np.ndarray:
    return PROFILE_AMP * (
        -np.cos(2 * np.pi * u) / (4 * np.pi) + np.cos(4 * np.pi * u) / (16 * np.pi)
    )


def profile_derivative(u: np.ndarray, order: int) -> np.ndarray:
    shift = order * np.pi / 2
    return PROFILE_AMP * (
        0.5 * (2 * np.pi) ** order * np.sin(2 * np.pi * u + shift)
        - 0.25 * (4 * np.pi) ** order * np.sin(4 * np.pi * u + shift)
    )


@lru_cache(maxsize=None)
def profile_derivative_sup(order: int) -> float:
    grid = np.linspace(0.0, 1.0, 8193)
    return float(np.abs(profile_derivative(grid, order)).max())


@lru_cache(maxsize=None)
def bump_holder_norm(d: int, order: int) -> float:
    """Sup over multi-indices |a| <= order of the tensor bump's derivative sup."""

    def best(remaining: int, axes: int) -> float:
        if axes == 0:
            return 1.0 if remaining == 0 else 0.0
        return max(
            profile_derivative_sup(o) * best(remaining - o, axes - 1)
            for o in range(remaining + 1)
        )

    return max(best(j, d) for j in range(order + 1))


def bump_sup(d: int) -> float:
    return PROFILE_SUP_1D**d


def bump_l1(d: int) -> float:
    return PROFILE_L1_1D**d


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (6 * t * t - 15 * t + 10)


def _smoothstep_antideriv(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (t * t - 3 * t + 2.5)


# integral of the ramp over [0, 1]; the floor base uses it as 1/||phi||_1
RAMP_MASS = 0.5


def _ramp(x: np.ndarray) -> np.ndarray:
    """Smooth step: 0 below 1/3, 1 above 2/3, quintic in between."""
    return _smoothstep(3.0 * np.asarray(x) - 1.0)


def _ramp_antideriv(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    mid = _smoothstep_antideriv(3.0 * x - 1.0) / 3.0
    return np.where(x >= 2.0 / 3.0, 1.0 / 6.0 + (x - 2.0 / 3.0), mid)


class BaseProfile(Enum):
    UNIFORM = "uniform"
    EPS2_FLOOR = "eps2_floor"


@dataclass(frozen=True)
class SmoothBumpDensity:
    """beta-smooth density on [0,1]^d: base profile plus signed bumps.

    eta is a flat {-1, 0, +1} vector of length kappa^d in the same
    axis-0-fastest cell order used for binning.  Positivity demands
    rho * kappa^(d/2) * sup|h| <= 1/2 for the uniform base and <= eps^2 for
    the floor base; construction rejects anything else.
    """

    d: int
    beta: float
    kappa: int
    rho: float
    eta: np.ndarray
    base: BaseProfile = BaseProfile.UNIFORM
    base_eps: float | None = None
    profile_name: str = PROFILE_NAME

    def __post_init__(self):
        eta = np.ascontiguousarray(self.eta, dtype=np.int8)
        eta.flags.writeable = False
        object.__setattr__(self, "eta", eta)
        if self.d < 1 or self.kappa < 1:
            raise ConstructionError("dimension and resolution must be >= 1")
        if self.rho < 0:
            raise ConstructionError("bump amplitude must be nonnegative")
        if eta.size != self.kappa**self.d:
            raise ConstructionError("eta must have length kappa^d")
        if eta.size and np.any(np.abs(eta.astype(np.int64)) > 1):
            raise ConstructionError("eta entries must be in {-1, 0, +1}")
        if self.base is BaseProfile.EPS2_FLOOR:
            if self.base_eps is None or not 0 < self.base_eps < 1:
                raise ConstructionError("floor base requires eps in (0, 1)")
            budget = self.base_eps**2
        else:
            budget = 0.5
        if self.rho * self.kappa ** (self.d / 2) * bump_sup(self.d) > budget + 1e-12:
            raise ConstructionError("bump amplitude violates the positivity budget")

    @property
    def sample_kind(self) -> SampleKind:
        return SampleKind.CUBE

    @property
    def dim(self) -> int:
        return self.d

    # -- pointwise evaluation ------------------------------------------------

    def base_density(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.base is BaseProfile.UNIFORM:
            return np.ones(points.shape[0])
        e2 = self.base_eps**2
        return e2 + (1.0 - e2) / RAMP_MASS * _ramp(points[:, 0])

    def base_max(self) -> float:
        if self.base is BaseProfile.UNIFORM:
            return 1.0
        e2 = self.base_eps**2
        return e2 + (1.0 - e2) / RAMP_MASS

    def density(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = self.base_density(points)
        if self.rho == 0 or not np.any(self.eta):
            return out
        coords = cell_coords(points, self.kappa)
        strides = self.kappa ** np.arange(self.d, dtype=np.int64)
        signs = self.eta[coords @ strides].astype(np.float64)
        frac = points * self.kappa - coords
        shape = np.prod(profile(frac), axis=1)
        scale = self.rho * self.kappa ** (self.d / 2)
        return out + scale * signs * shape

    # -- exact cell masses ---------------------------------------------------

    def _base_cell_masses(self, kappa_out: int) -> np.ndarray:
        edges = np.arange(kappa_out + 1) / kappa_out
        if self.base is BaseProfile.UNIFORM:
            return np.full(kappa_out**self.d, kappa_out ** (-self.d))
        e2 = self.base_eps**2
        ramp_masses = np.diff(_ramp_antideriv(edges))  # axis-0 slabs
        axis0 = e2 / kappa_out + (1.0 - e2) / RAMP_MASS * ramp_masses
        mass = axis0
        for _ in range(self.d - 1):
            mass = np.multiply.outer(np.full(kappa_out, 1.0 / kappa_out), mass)
        # outer() above builds axis order (last, ..., first); ravel order F
        # with axis 0 fastest is equivalent to transposing back then C-ravel
        return np.transpose(mass).ravel(order="F") if self.d > 1 else mass

    def _axis_overlap(self, kappa_out: int) -> np.ndarray:
        """I[c, b] = integral of this density's per-axis bump factor of cell b
        over output cell c; closed form via the profile antiderivative."""
        kf = self.kappa
        lo = np.arange(kappa_out)[:, None] / kappa_out
        hi = (np.arange(kappa_out)[:, None] + 1) / kappa_out
        b = np.arange(kf)[None, :]
        u_lo = np.clip(lo * kf - b, 0.0, 1.0)
        u_hi = np.clip(hi * kf - b, 0.0, 1.0)
        vals = (profile_antideriv(u_hi) - profile_antideriv(u_lo)) / math.sqrt(kf)
        vals[u_hi <= u_lo] = 0.0
        return vals

    def cell_masses(self, kappa_out: int | None = None) -> np.ndarray:
        """Exact probabilities of the kappa_out-grid cells, flat cell order."""
        kappa_out = kappa_out or self.kappa
        masses = self._base_cell_masses(kappa_out)
        if self.rho == 0 or not np.any(self.eta):
            return masses
        overlap = self._axis_overlap(kappa_out)
        signed = self.eta.astype(np.float64).reshape((self.kappa,) * self.d, order="F")
        for axis in range(self.d):
            signed = np.moveaxis(
                np.tensordot(overlap, np.moveaxis(signed, axis, 0), axes=([1], [0])),
                0,
                axis,
            )
        return masses + self.rho * signed.ravel(order="F")

    # -- sampling ------------------------------------------------------------

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        envelope = self.base_max() + self.rho * self.kappa ** (self.d / 2) * bump_sup(self.d)
        chunks: list[np.ndarray] = []
        got = 0
        while got < n:
            batch = max(128, int(1.3 * (n - got) * envelope) + 16)
            pts = rng.random((batch, self.d))
            u = rng.random(batch)
            keep = pts[u * envelope <= self.density(pts)]
            chunks.append(keep)
            got += keep.shape[0]
        return np.concatenate(chunks, axis=0)[:n] if chunks else np.zeros((0, self.d))


def uniform_bump_density(d: int, beta: float, kappa: int = 1) -> SmoothBumpDensity:
    return SmoothBumpDensity(
        d=d, beta=beta, kappa=kappa, rho=0.0, eta=np.zeros(kappa**d, dtype=np.int8)
    )


def project_grid(f: SmoothBumpDensity, kappa: int) -> DiscretePmf:
    """L2 projection onto the kappa-grid, i.e. the exact cell-mass pmf.

    At the density's own resolution the bumps integrate to zero per cell and
    the projection collapses to the base; finer grids see the bumps.
    """
    masses = f.cell_masses(kappa)
    masses = np.maximum(masses, 0.0)
    return DiscretePmf(weights=masses / masses.sum())


# -- quadrature oracles ------------------------------------------------------


def _axis_breaks(f: SmoothBumpDensity, axis: int, halves: bool) -> np.ndarray:
    pieces = [np.arange(f.kappa + 1) / f.kappa]
    if halves:
        pieces.append((np.arange(f.kappa) + 0.5) / f.kappa)
    if axis == 0 and f.base is BaseProfile.EPS2_FLOOR:
        pieces.append(np.array([1.0 / 3.0, 2.0 / 3.0]))
    return np.unique(np.concatenate(pieces))


def quad_nodes(
    f: SmoothBumpDensity, order: int = 10, halves: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes aligned with the density's panel structure."""
    x01, w01 = np.polynomial.legendre.leggauss(order)
    x01 = (x01 + 1.0) / 2.0
    w01 = w01 / 2.0
    axis_nodes = []
    axis_weights = []
    for axis in range(f.d):
        breaks = _axis_breaks(f, axis, halves)
        lo, hi = breaks[:-1], breaks[1:]
        nodes = (lo[:, None] + (hi - lo)[:, None] * x01[None, :]).ravel()
        weights = ((hi - lo)[:, None] * w01[None, :]).ravel()
        axis_nodes.append(nodes)
        axis_weights.append(weights)
    grids = np.meshgrid(*axis_nodes, indexing="ij")
    wgrids = np.meshgrid(*axis_weights, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return points, weights


def quad_integrate(f: SmoothBumpDensity, values_fn, order: int = 10,
                   halves: bool = False) -> float:
    points, weights = quad_nodes(f, order=order, halves=halves)
    return float(np.sum(weights * values_fn(points)))


def quad_mass(f: SmoothBumpDensity, order: int = 10) -> float:
    return quad_integrate(f, f.density, order=order)


def quad_tv(f: SmoothBumpDensity, g: SmoothBumpDensity, order: int = 10) -> float:
    """Half the L1 distance; panels split at half-cells where |f-g| kinks."""
    return 0.5 * quad_integrate(
        f, lambda p: np.abs(f.density(p) - g.density(p)), order=order, halves=True
    )


def quad_l1_to_uniform(f: SmoothBumpDensity, order: int = 10) -> float:
    return quad_integrate(
        f, lambda p: np.abs(f.density(p) - 1.0), order=order, halves=True
    )


def quad_l2_sq(f: SmoothBumpDensity, g: SmoothBumpDensity, order: int = 10) -> float:
    return quad_integrate(
        f, lambda p: (f.density(p) - g.density(p)) ** 2, order=order
    )


def quad_hellinger_sq(f: SmoothBumpDensity, g: SmoothBumpDensity, order: int = 12) -> float:
    return quad_integrate(
        f,
        lambda p: (np.sqrt(f.density(p)) - np.sqrt(g.density(p))) ** 2,
        order=order,
    )
