"""Monte Carlo error maps: per-point error estimation, grid sweeps, boundary
search, and trade-off summaries.

Every phase point is a pure function of (config, n, m): trial seeds are
derived by hashing (base seed, n, m, trial, hypothesis), so any subset of a
grid reproduces in isolation and thread count changes nothing but wall time.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__, kernels
from .adversarial import (
    ClassTag,
    LfhtInstance,
    gaussian_prior_instance,
    paninski_instance,
    smooth_bump_instance,
)
from .baselines import (
    birge_test,
    estimate_pair,
    huber_test,
    np_oracle_test,
    scheffe_test,
)
from .dist import ConstructionError, DiscretePmf, Source, sample
from .l2 import ClassConfig, lfht_test, lfht_test_pd
from .rng import derive_seed, generator

logger = logging.getLogger(__name__)

CSV_HEADER = "class,k,beta,d,s,eps,test,n,m,trials,err1,err2,err_total,ci95,flag"

TESTS = ("l2", "l2_flat", "scheffe", "np", "huber", "birge")


@dataclass(frozen=True)
class ExperimentConfig:
    class_tag: str
    eps: float
    n_grid: tuple
    m_grid: tuple
    trials: int = 100
    base_seed: int = 0
    error_target: float = 0.25
    test: str = "l2"
    test_params: dict = field(default_factory=dict)
    k: int | None = None
    beta: float | None = None
    d: int | None = None
    s: float | None = None
    c_class: float | None = None
    instance_policy: str = "fixed"
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(v) for v in self.n_grid))
        object.__setattr__(self, "m_grid", tuple(int(v) for v in self.m_grid))
        if self.class_tag not in ("db", "d", "h", "g"):
            raise ConstructionError("class must be one of db, d, h, g")
        if self.test not in TESTS:
            raise ConstructionError(f"unknown test {self.test!r}")
        if list(self.n_grid) != sorted(self.n_grid) or list(self.m_grid) != sorted(
            self.m_grid
        ):
            raise ConstructionError("grids must be sorted ascending")
        if self.trials < 50:
            raise ConstructionError("need at least 50 trials per point")
        if self.instance_policy not in ("fixed", "redraw"):
            raise ConstructionError("instance policy must be fixed or redraw")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        return cls(**doc)

    def to_json(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        doc = self.to_json()
        doc.pop("threads")  # cannot affect results, so keep hashes comparable
        canon = json.dumps(doc, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class PhasePoint:
    n: int
    m: int
    err1: float
    err2: float
    trials: int
    ci95: float

    @property
    def err_total(self) -> float:
        return self.err1 + self.err2


@dataclass(frozen=True)
class BoundaryPoint:
    n: int
    m_star: int
    flag: str  # OK or OPEN
    probes: int


@dataclass(frozen=True)
class BoundaryCurve:
    points: tuple
    target: float
    raw_violations: int


@dataclass(frozen=True)
class TradeoffSummary:
    slope: float
    intercept: float
    product_spread: float
    n_points: int


def wilson_halfwidth(p_hat: float, trials: int, z: float = 1.96) -> float:
    """Half-width of the Wilson score interval for a proportion."""
    if trials <= 0:
        return 1.0
    denom = 1.0 + z**2 / trials
    half = (
        z
        * math.sqrt(p_hat * (1.0 - p_hat) / trials + z**2 / (4.0 * trials**2))
        / denom
    )
    return half


def make_instance(cfg: ExperimentConfig, seed: int) -> LfhtInstance:
    if cfg.class_tag in ("db", "d"):
        if cfg.k is None or cfg.k % 2:
            raise ConstructionError("discrete classes need an even alphabet size k")
        return paninski_instance(cfg.k // 2, cfg.eps, seed)
    if cfg.class_tag == "h":
        c = cfg.c_class if cfg.c_class is not None else 2.0
        return smooth_bump_instance(cfg.beta, cfg.d, c, cfg.eps, seed)
    c = cfg.c_class if cfg.c_class is not None else 1.0
    return gaussian_prior_instance(cfg.s, c, cfg.eps, seed)


def _class_config(cfg: ExperimentConfig, instance: LfhtInstance) -> ClassConfig:
    tag = {"db": ClassTag.P_DB, "d": ClassTag.P_D, "h": ClassTag.P_H,
           "g": ClassTag.P_G}[cfg.class_tag]
    return ClassConfig(
        tag=tag,
        eps=cfg.eps,
        k=cfg.k,
        beta=cfg.beta,
        d=cfg.d,
        s=cfg.s,
        c_sob=cfg.c_class if cfg.c_class is not None else 1.0,
        c_kappa=float(cfg.test_params.get("c_kappa", 1.0)),
        use_diagonal=bool(cfg.test_params.get("use_diagonal", False)),
        flatten_threshold=float(cfg.test_params.get("flatten_threshold", 4.0)),
    )


def _draw_discrete_rows(pmf: DiscretePmf, n: int, seeds: list[int]) -> np.ndarray:
    """One row per trial, each from its own counter-based stream."""
    cdf = np.cumsum(pmf.weights)
    cdf[-1] = 1.0
    out = np.empty((len(seeds), n), dtype=np.int64)
    for row, seed in enumerate(seeds):
        u = generator(seed).random(n)
        out[row] = np.searchsorted(cdf, u, side="right") + 1
    return out


def _discrete_l2_decisions(
    px: DiscretePmf, py: DiscretePmf, hz: DiscretePmf, n: int, m: int,
    seeds: list[int],
) -> np.ndarray:
    k = px.k
    obs_x = _draw_discrete_rows(px, n, [derive_seed(s, "X") for s in seeds])
    obs_y = _draw_discrete_rows(py, n, [derive_seed(s, "Y") for s in seeds])
    obs_z = _draw_discrete_rows(hz, m, [derive_seed(s, "Z") for s in seeds])
    cx = kernels.batch_counts(obs_x, k)
    cy = kernels.batch_counts(obs_y, k)
    cz = kernels.batch_counts(obs_z, k)
    nums = kernels.l2_diff_numerator(cx, cy, cz, n, m)
    return (nums > 0).astype(np.int64)


def _trial_decisions(
    cfg: ExperimentConfig, n: int, m: int, hypothesis: int, seeds: list[int]
) -> np.ndarray:
    fixed = None
    if cfg.instance_policy == "fixed":
        fixed = make_instance(cfg, derive_seed(cfg.base_seed, "instance"))
    if (
        cfg.test == "l2"
        and cfg.class_tag in ("db", "d")
        and fixed is not None
    ):
        hz = fixed.px if hypothesis == 0 else fixed.py
        return _discrete_l2_decisions(fixed.px, fixed.py, hz, n, m, seeds)
    decisions = np.empty(len(seeds), dtype=np.int64)
    for i, trial_seed in enumerate(seeds):
        inst = fixed or make_instance(cfg, derive_seed(trial_seed, "instance"))
        hz_dist = inst.px if hypothesis == 0 else inst.py
        x = sample(inst.px, n, derive_seed(trial_seed, "X"), Source.X)
        y = sample(inst.py, n, derive_seed(trial_seed, "Y"), Source.Y)
        z = sample(hz_dist, m, derive_seed(trial_seed, "Z"), Source.Z)
        decisions[i] = _single_decision(cfg, inst, x, y, z, trial_seed)
    return decisions


def _single_decision(cfg, inst, x, y, z, trial_seed) -> int:
    if cfg.test == "l2":
        return lfht_test(x, y, z, _class_config(cfg, inst)).decision
    if cfg.test == "l2_flat":
        return lfht_test_pd(
            x, y, z, cfg.k, cfg.eps, derive_seed(trial_seed, "flat"),
            threshold_c=float(cfg.test_params.get("threshold_c", 4.0)),
        ).decision
    if cfg.test == "np":
        return np_oracle_test(inst.px, inst.py, z)
    est = estimate_pair(
        x, y, cfg.k, beta_smooth=cfg.test_params.get("beta_smooth", 0.5)
    )
    if cfg.test == "scheffe":
        return scheffe_test(est, z)
    if cfg.test == "huber":
        # censor at the separation the instance can actually defend, not the
        # construction parameter (which overstates TV by class-level constants)
        huber_eps = float(cfg.test_params.get("huber_eps", inst.separation))
        return huber_test(est, z, huber_eps)
    return birge_test(est, z)


def estimate_error(cfg: ExperimentConfig, n: int, m: int) -> PhasePoint:
    """Type-I and type-II error rates at one (n, m) point."""
    errors = []
    for hypothesis in (0, 1):
        seeds = [
            derive_seed(cfg.base_seed, n, m, t, hypothesis)
            for t in range(cfg.trials)
        ]
        decisions = _trial_decisions(cfg, n, m, hypothesis, seeds)
        errors.append(float(np.mean(decisions != hypothesis)))
    pooled = 0.5 * (errors[0] + errors[1])
    return PhasePoint(
        n=n,
        m=m,
        err1=errors[0],
        err2=errors[1],
        trials=cfg.trials,
        ci95=wilson_halfwidth(pooled, 2 * cfg.trials),
    )


def sweep(cfg: ExperimentConfig) -> list[PhasePoint]:
    """Full n x m grid; output order is grid order for any thread count."""
    points = [(n, m) for n in cfg.n_grid for m in cfg.m_grid]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda nm: estimate_error(cfg, *nm), points))
    return [estimate_error(cfg, n, m) for n, m in points]


def find_boundary(cfg: ExperimentConfig, target: float | None = None) -> BoundaryCurve:
    """Smallest m at each n with total error within target (8 probes max)."""
    target = cfg.error_target if target is None else target
    raw: list[BoundaryPoint] = []
    for n in cfg.n_grid:
        lo, hi = cfg.m_grid[0], cfg.m_grid[-1]
        probes = 0

        def total_error(m: int) -> float:
            nonlocal probes
            probes += 1
            probe_cfg = replace(
                cfg, base_seed=derive_seed(cfg.base_seed, "boundary", n, probes)
            )
            point = estimate_error(probe_cfg, n, m)
            return point.err_total

        if total_error(hi) > target:
            raw.append(BoundaryPoint(n=n, m_star=hi, flag="OPEN", probes=probes))
            continue
        if total_error(lo) <= target:
            raw.append(BoundaryPoint(n=n, m_star=lo, flag="OK", probes=probes))
            continue
        while probes < 8 and hi > lo + 1 and hi / lo > 1.2:
            mid = max(lo + 1, min(hi - 1, round(math.sqrt(lo * hi))))
            if total_error(mid) <= target:
                hi = mid
            else:
                lo = mid
        raw.append(BoundaryPoint(n=n, m_star=hi, flag="OK", probes=probes))
    violations = 0
    best = math.inf
    iso: list[BoundaryPoint] = []
    for point in raw:
        if point.flag == "OK":
            if point.m_star > best:
                violations += 1
                point = replace(point, m_star=int(best))
            else:
                best = point.m_star
        iso.append(point)
    if violations:
        logger.info("boundary: %d raw monotonicity violations smoothed", violations)
    return BoundaryCurve(points=tuple(iso), target=target, raw_violations=violations)


def tradeoff_report(curve: BoundaryCurve) -> TradeoffSummary:
    """Log-log slope of the boundary and the spread of the n*m product."""
    ok = [p for p in curve.points if p.flag == "OK"]
    if len(ok) < 4:
        raise ConstructionError("need at least 4 closed boundary points")
    log_n = np.log([p.n for p in ok])
    log_m = np.log([p.m_star for p in ok])
    slope, intercept = np.polyfit(log_n, log_m, 1)
    products = np.array([p.n * p.m_star for p in ok], dtype=float)
    return TradeoffSummary(
        slope=float(slope),
        intercept=float(intercept),
        product_spread=float(products.max() / products.min()),
        n_points=len(ok),
    )


# -- CSV output -------------------------------------------------------------------


def _field(value) -> str:
    return "" if value is None else str(value)


def csv_rows(cfg: ExperimentConfig, points, flags=None) -> list[str]:
    # effective config echoed up front; the provenance line closes the file.
    # threads is execution machinery and is left out, same as in the hash
    echo = cfg.to_json()
    echo.pop("threads")
    rows = [
        "# config " + json.dumps(echo, sort_keys=True),
        CSV_HEADER,
    ]
    flags = flags or [""] * len(points)
    for point, flag in zip(points, flags):
        rows.append(
            ",".join(
                [
                    cfg.class_tag,
                    _field(cfg.k),
                    _field(cfg.beta),
                    _field(cfg.d),
                    _field(cfg.s),
                    f"{cfg.eps:g}",
                    cfg.test,
                    str(point.n),
                    str(point.m),
                    str(point.trials),
                    f"{point.err1:.6f}",
                    f"{point.err2:.6f}",
                    f"{point.err_total:.6f}",
                    f"{point.ci95:.6f}",
                    flag,
                ]
            )
        )
    return rows


def write_csv(path, cfg: ExperimentConfig, points, seed: int, flags=None) -> None:
    rows = csv_rows(cfg, points, flags)
    rows.append(
        f"# lfht-lab {__version__} seed={seed} config-hash={cfg.config_hash()}"
    )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(rows) + "\n")


def boundary_phase_points(cfg: ExperimentConfig, curve: BoundaryCurve):
    """Boundary points re-expressed in the sweep schema (one row per n)."""
    points = []
    flags = []
    for bp in curve.points:
        point = estimate_error(
            replace(cfg, base_seed=derive_seed(cfg.base_seed, "boundary-final", bp.n)),
            bp.n,
            bp.m_star,
        )
        points.append(point)
        flags.append(bp.flag)
    return points, flags
