"""Worst-case instance generators and mixture-divergence calculators.

The constructions are the hard instances for each distribution class: paired
+/-eps perturbations of uniform for discrete alphabets, sign-bump densities
for the smooth class (at density level 1, or at level eps^2 for Hellinger
separation), random means from a truncated prior for the Gaussian sequence
class, and heavy/light split pairs with matching low moments for the
unbounded discrete class.  Every emitted instance records a separation value
it can defend under audit.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import bump as bump_mod
from .bump import BaseProfile, SmoothBumpDensity, bump_holder_norm, bump_l1, bump_sup
from .dist import ConstructionError, DiscretePmf, SampleSet, make_discrete_pmf, uniform_pmf
from .divergence import gaussian_divergences, tv
from .gauss import GaussianSequenceSpec
from .rng import derive_seed, generator


class ClassTag(Enum):
    P_D = "d"
    P_DB = "db"
    P_H = "h"
    P_G = "g"


class Truth(Enum):
    NULL = 0  # Z drawn from the X source
    ALT = 1   # Z drawn from the Y source


@dataclass(frozen=True)
class LfhtInstance:
    class_tag: ClassTag
    px: object
    py: object
    eps: float
    separation: float
    truth: Truth = Truth.NULL
    metadata: dict = field(default_factory=dict)

    def audit_separation(self) -> float:
        """Measured lower bound on TV(px, py); must cover the recorded value."""
        if isinstance(self.px, DiscretePmf):
            return tv(self.px, self.py)
        if isinstance(self.px, SmoothBumpDensity):
            return bump_mod.quad_tv(self.px, self.py)
        if isinstance(self.px, GaussianSequenceSpec):
            return gaussian_divergences(self.px.theta, self.py.theta).tv_lower
        raise ConstructionError("unknown instance distribution type")


# -- discrete: paired perturbations of uniform --------------------------------


def paninski_pair(
    k: int, eps: float, eta: np.ndarray | None = None, seed: int | None = None
) -> tuple[DiscretePmf, DiscretePmf]:
    """Uniform on [2k] against the paired +/-eps tilt with signs eta."""
    if not 0 <= eps < 1:
        raise ConstructionError("eps must lie in [0, 1)")
    if eta is None:
        if seed is None:
            raise ConstructionError("provide eta or a seed")
        eta = generator(derive_seed(seed, "paninski-eta")).choice((-1, 1), size=k)
    eta = np.asarray(eta)
    if eta.shape != (k,) or np.any(np.abs(eta) != 1):
        raise ConstructionError("eta must be a +/-1 vector of length k")
    weights = np.empty(2 * k)
    weights[0::2] = (1 + eta * eps) / (2 * k)
    weights[1::2] = (1 - eta * eps) / (2 * k)
    return uniform_pmf(2 * k), make_discrete_pmf(weights)


def paninski_instance(k: int, eps: float, seed: int, truth: Truth = Truth.NULL) -> LfhtInstance:
    p0, p_eta = paninski_pair(k, eps, seed=seed)
    return LfhtInstance(
        class_tag=ClassTag.P_DB,
        px=p0,
        py=p_eta,
        eps=eps,
        separation=tv(p0, p_eta),
        truth=truth,
        metadata={"k": k, "alphabet": 2 * k},
    )


# -- smooth class: sign bumps on the uniform base ------------------------------


def smooth_bump_pair(
    beta: float,
    d: int,
    C: float,
    eps: float,
    eta: np.ndarray | None = None,
    seed: int | None = None,
    c_kappa: float = 1.0,
) -> tuple[SmoothBumpDensity, SmoothBumpDensity]:
    """Uniform density against the bump perturbation at scale eps.

    Resolution grows like eps^(-1/beta); the amplitude is the largest value
    permitted by positivity and the smoothness-norm budget, which puts it at
    the eps^((2 beta + d) / (2 beta)) scale.
    """
    if beta <= 0 or d < 1 or C <= 1 or not 0 < eps < 1:
        raise ConstructionError("need beta > 0, d >= 1, C > 1, eps in (0, 1)")
    kappa = max(1, math.ceil(c_kappa * eps ** (-1.0 / beta)))
    floor_order = math.floor(beta)
    norm_budget = max(
        4.0 * bump_holder_norm(d, floor_order),
        2.0 * bump_holder_norm(d, floor_order + 1),
    )
    rho = min(
        0.5 / (kappa ** (d / 2) * bump_sup(d)),
        C / (norm_budget * kappa ** (d / 2 + beta)),
    )
    if rho <= 0:
        raise ConstructionError("no positive amplitude satisfies the constraints")
    if eta is None:
        if seed is None:
            raise ConstructionError("provide eta or a seed")
        eta = generator(derive_seed(seed, "bump-eta")).choice(
            np.array([-1, 1], dtype=np.int8), size=kappa**d
        )
    f0 = bump_mod.uniform_bump_density(d, beta, kappa)
    f_eta = SmoothBumpDensity(
        d=d, beta=beta, kappa=kappa, rho=rho, eta=np.asarray(eta, dtype=np.int8)
    )
    return f0, f_eta


def smooth_bump_instance(
    beta: float, d: int, C: float, eps: float, seed: int, truth: Truth = Truth.NULL,
    c_kappa: float = 1.0,
) -> LfhtInstance:
    f0, f_eta = smooth_bump_pair(beta, d, C, eps, seed=seed, c_kappa=c_kappa)
    nnz = int(np.count_nonzero(f_eta.eta))
    separation = 0.5 * f_eta.rho * nnz * f_eta.kappa ** (-d / 2) * bump_l1(d)
    return LfhtInstance(
        class_tag=ClassTag.P_H,
        px=f0,
        py=f_eta,
        eps=eps,
        separation=separation,
        truth=truth,
        metadata={"beta": beta, "d": d, "C": C, "kappa": f_eta.kappa, "rho": f_eta.rho},
    )


def hellinger_floor_pair(
    beta: float,
    d: int,
    eps: float,
    eta: np.ndarray | None = None,
    seed: int | None = None,
    c_kappa: float = 1.0,
    safety: float = 0.5,
) -> tuple[SmoothBumpDensity, SmoothBumpDensity]:
    """Floor-level construction: bumps confined to the slab where the base
    density equals eps^2, which inflates Hellinger relative to TV."""
    if beta <= 0 or d < 1 or not 0 < eps < 1:
        raise ConstructionError("need beta > 0, d >= 1, eps in (0, 1)")
    if not 0 < safety <= 1:
        raise ConstructionError("safety must lie in (0, 1]")
    kappa = max(3, math.ceil(c_kappa * eps ** (-2.0 / beta)))
    rho = safety * eps**2 / (kappa ** (d / 2) * bump_sup(d))
    slab_cols = kappa // 3
    if eta is None:
        if seed is None:
            raise ConstructionError("provide eta or a seed")
        rng = generator(derive_seed(seed, "floor-eta"))
        eta = np.zeros((kappa,) * d, dtype=np.int8)
        eta[:slab_cols] = rng.choice(
            np.array([-1, 1], dtype=np.int8), size=(slab_cols,) + (kappa,) * (d - 1)
        )
        eta = eta.ravel(order="F")
    else:
        eta = np.asarray(eta, dtype=np.int8)
        tensor = eta.reshape((kappa,) * d, order="F")
        if np.any(tensor[slab_cols:]):
            raise ConstructionError("bumps must stay inside the flat slab")
    f0 = SmoothBumpDensity(
        d=d, beta=beta, kappa=kappa, rho=0.0,
        eta=np.zeros(kappa**d, dtype=np.int8),
        base=BaseProfile.EPS2_FLOOR, base_eps=eps,
    )
    f_eta = SmoothBumpDensity(
        d=d, beta=beta, kappa=kappa, rho=rho, eta=eta,
        base=BaseProfile.EPS2_FLOOR, base_eps=eps,
    )
    return f0, f_eta


# -- Gaussian sequence class: truncated prior ----------------------------------


def prior_constants(s: float, C: float) -> tuple[float, float]:
    """Solve 100 c1 c2^(2s+1) = C together with c1 c2 = 2."""
    if s <= 0 or C <= 0:
        raise ConstructionError("need s > 0 and C > 0")
    c2 = (C / 200.0) ** (1.0 / (2.0 * s))
    return 2.0 / c2, c2


def gaussian_prior_instance(
    s: float,
    C: float,
    eps: float,
    seed: int,
    truth: Truth = Truth.NULL,
    max_attempts: int = 1000,
    min_l2_factor: float = 0.05,
) -> LfhtInstance:
    """Null mean zero against a mean drawn from the truncated prior.

    Draws are rejected until the Sobolev norm fits inside the ellipsoid and
    the mean has L2 norm at least min_l2_factor * eps.  The acceptance event
    has probability near one only asymptotically in 1/eps, so the L2 floor is
    a calibration parameter rather than eps itself.
    """
    if not 0 < eps < 1:
        raise ConstructionError("eps must lie in (0, 1)")
    c1, c2 = prior_constants(s, C)
    r = max(1, math.ceil(c2 * eps ** (-1.0 / s)))
    gamma_val = c1 * eps ** ((2 * s + 1) / s)
    gamma = np.full(r, gamma_val)
    rng = generator(derive_seed(seed, "gaussian-prior"))
    for attempt in range(1, max_attempts + 1):
        theta = rng.standard_normal(r) * math.sqrt(gamma_val)
        spec = GaussianSequenceSpec(theta=theta, s=s, c_sob=C, gamma=gamma)
        if spec.in_ellipsoid() and np.linalg.norm(theta) >= min_l2_factor * eps:
            null = GaussianSequenceSpec(theta=np.zeros(r), s=s, c_sob=C)
            return LfhtInstance(
                class_tag=ClassTag.P_G,
                px=null,
                py=spec,
                eps=eps,
                separation=gaussian_divergences(null.theta, theta).tv_lower,
                truth=truth,
                metadata={"s": s, "C": C, "c1": c1, "c2": c2, "r": r,
                          "gamma": gamma_val, "attempts": attempt},
            )
    raise ConstructionError(f"no valid prior draw in {max_attempts} attempts")


# -- unbounded discrete class: heavy/light split pairs -------------------------


def valiant_pair(
    k: int, n: int, m: int, eps: float, eta_v: float = 0.01
) -> tuple[DiscretePmf, DiscretePmf]:
    """Identical heavy parts, disjoint light parts each carrying mass eps."""
    if not 0 < eps < 0.5:
        raise ConstructionError("eps must lie in (0, 1/2)")
    if m > n:
        raise ConstructionError("construction requires m <= n")
    gamma = max(1, round(n / eta_v))
    if gamma > k / 2:
        raise ConstructionError("alphabet too small: need n/eta_v <= k/2")
    light = k // 4
    start = k // 2
    if start + 2 * light > k:
        raise ConstructionError("alphabet too small for two light blocks")
    p = np.zeros(k)
    q = np.zeros(k)
    p[:gamma] = (1 - eps) / gamma
    q[:gamma] = (1 - eps) / gamma
    p[start : start + light] = eps / light
    q[start + light : start + 2 * light] = eps / light
    return make_discrete_pmf(p), make_discrete_pmf(q)


# -- fingerprints and moments --------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    """Counts of bins by their per-sample occurrence tuple (zero tuple included)."""

    counts: dict
    ell: int
    sizes: tuple

    def total_bins(self) -> int:
        return sum(self.counts.values())

    def rows(self):
        for key in sorted(self.counts):
            yield key, self.counts[key]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("tuple,count\n")
            for key, cnt in self.rows():
                fh.write("\"%s\",%d\n" % (" ".join(map(str, key)), cnt))


def fingerprint(samples: list[SampleSet], k: int) -> Fingerprint:
    per_sample = [
        np.bincount(s.observations, minlength=k + 1)[1:] for s in samples
    ]
    stacked = np.stack(per_sample, axis=1)
    counter = Counter(tuple(int(v) for v in row) for row in stacked)
    return Fingerprint(
        counts=dict(counter),
        ell=len(samples),
        sizes=tuple(s.count for s in samples),
    )


def moments(dists: list[DiscretePmf], sizes, a) -> float:
    """Size-scaled mixed moments m(a) = sum_i prod_j (n_j p_j(i))^(a_j).

    Compensated summation: alphabets run to 1e6 with tiny summands.
    """
    if len(dists) != len(sizes) or len(sizes) != len(a):
        raise ConstructionError("dists, sizes, and exponent tuple must align")
    k = dists[0].k
    if any(dist.k != k for dist in dists):
        raise ConstructionError("moment calculation requires a shared alphabet")
    terms = np.ones(k)
    for dist, n_j, a_j in zip(dists, sizes, a):
        if a_j:
            terms = terms * (n_j * dist.weights) ** a_j
    return math.fsum(terms.tolist())


# -- closed-form mixture-divergence diagnostics --------------------------------


def ingster_chi2_exponent(n: int, rho: float, kappa: int, d: int) -> float:
    """Exponent bounding chi^2 of the n-fold bump mixture against uniform."""
    return float(n**2 * rho**4 * kappa**d)


def gaussian_gof_kl(n: int, gamma) -> float:
    """KL between the n-fold prior mixture and pure noise, summed over modes."""
    g = np.asarray(gamma, dtype=np.float64)
    ng = n * g
    return 0.5 * float(np.sum(-ng / (ng + 1.0) + np.log1p(ng)))


def gaussian_lfht_kl(n: int, m: int, gamma) -> float:
    """KL bound for the three-sample mixture pair in the sequence model."""
    g = np.asarray(gamma, dtype=np.float64)
    return 0.5 * float(
        np.sum(g * m - np.log1p(g * m / (g * (n + m) + 1.0)))
    )
