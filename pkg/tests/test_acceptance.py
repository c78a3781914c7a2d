"""Acceptance gate: one test per published criterion, each printing a
pass/fail line.  Tolerances are pinned here and nowhere else.

Run `pytest tests/test_acceptance.py -v -s` to watch the lines stream.
"""

import math
import time

import numpy as np
import pytest

from lfht_lab.adversarial import smooth_bump_pair
from lfht_lab.baselines import permutation_pvalue
from lfht_lab.bump import project_grid, quad_hellinger_sq
from lfht_lab.dist import Source, make_discrete_pmf, sample
from lfht_lab.divergence import gaussian_divergences, hellinger
from lfht_lab.harness import (
    ExperimentConfig,
    estimate_error,
    find_boundary,
    tradeoff_report,
)
from lfht_lab.rng import derive_seed, generator
from lfht_lab.verify import (
    check_divergence_chain,
    check_enumeration_oracle,
    check_flatten_invariants,
    check_mean_variance_oracle,
    check_multinomial_bound,
    check_tensorization,
)


def report(criterion: str, passed: bool, detail: str, started: float) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[{criterion}] {status} ({time.time() - started:.1f}s) {detail}")


@pytest.fixture(scope="module")
def mean_var_results():
    # criteria 1 and 3 share one Monte Carlo run: 20 random pmf triples on
    # k=5 with n=m=8 and 2e5 statistic draws each
    return check_mean_variance_oracle(
        n_triples=20, mc_trials=200_000, k=5, n=8, m=8,
        z_limit=4.0, allowed_var_failures=1,
    )


def test_criterion_1_mean_formula_oracle(mean_var_results):
    started = time.time()
    mean_res, _ = mean_var_results
    report("criterion 1: mean-formula oracle", mean_res.passed, mean_res.detail, started)
    assert mean_res.passed, mean_res.detail


def test_criterion_2_exhaustive_enumeration():
    started = time.time()
    res = check_enumeration_oracle(
        k_values=(2, 3, 4), n_values=(1, 2, 3), m_values=(1, 2)
    )
    report("criterion 2: exhaustive enumeration", res.passed, res.detail, started)
    assert res.passed, res.detail


def test_criterion_3_variance_domination(mean_var_results):
    started = time.time()
    _, var_res = mean_var_results
    report("criterion 3: variance domination", var_res.passed, var_res.detail, started)
    assert var_res.passed, var_res.detail


def test_criterion_4_divergence_chain_and_tensorization():
    started = time.time()
    chain = check_divergence_chain(n_pairs=1000, slack=1e-12)
    tensor = check_tensorization(n_pairs=1000, slack=1e-12)
    passed = chain.passed and tensor.passed
    report(
        "criterion 4: divergence chain + tensorization", passed,
        f"{chain.detail}; {tensor.detail}", started,
    )
    assert passed, (chain.detail, tensor.detail)


def test_criterion_5_flattening_invariants():
    started = time.time()
    res = check_flatten_invariants(n_filters=100, k=64, slack=1e-12)
    report("criterion 5: flattening invariants", res.passed, res.detail, started)
    assert res.passed, res.detail


def test_criterion_6_calibrated_success():
    started = time.time()
    k, eps, trials = 100, 0.3, 400
    base = dict(class_tag="db", eps=eps, k=k, trials=trials, base_seed=11)

    def total_error(n, m):
        cfg = ExperimentConfig(n_grid=(n,), m_grid=(m,), **base)
        return estimate_error(cfg, n, m)

    found_c = None
    for c in (1, 2, 4, 8, 16):
        n = c * math.ceil(math.sqrt(k) / eps**2)
        m = c * math.ceil(1 / eps**2)
        point = total_error(n, m)
        if point.err_total <= 0.2:
            found_c = c
            break
    ok_scaling = found_c is not None

    # with m fixed at 16/eps^2, halving n below the threshold can only hurt
    ok_monotone = True
    if ok_scaling:
        m_fixed = math.ceil(16 / eps**2)
        n_star = found_c * math.ceil(math.sqrt(k) / eps**2)
        ladder = [total_error(n_star // 2**j, m_fixed) for j in range(3)]
        for better, worse in zip(ladder, ladder[1:]):
            slack = 3 * (better.ci95 + worse.ci95)
            if worse.err_total < better.err_total - slack:
                ok_monotone = False
    passed = ok_scaling and ok_monotone
    report(
        "criterion 6: calibrated success", passed,
        f"doubling search found c={found_c}, degradation monotone={ok_monotone}",
        started,
    )
    assert passed


def test_criterion_7_tradeoff_shape():
    started = time.time()
    n_grid = tuple(int(round(v)) for v in np.geomspace(512, 5120, 8))
    cfg = ExperimentConfig(
        class_tag="db", eps=0.5, k=256, n_grid=n_grid,
        m_grid=(8, 8192), trials=300, base_seed=21, error_target=0.25,
    )
    curve = find_boundary(cfg)
    summary = tradeoff_report(curve)
    slope_ok = -1.4 <= summary.slope <= -0.6
    spread_ok = summary.product_spread <= 16
    passed = slope_ok and spread_ok
    report(
        "criterion 7: trade-off shape", passed,
        f"slope={summary.slope:.3f}, product spread={summary.product_spread:.2f}, "
        f"{summary.n_points} closed points",
        started,
    )
    assert passed


def test_criterion_8_np_dominance():
    started = time.time()
    grid = [(32, 0.5), (64, 0.4), (128, 0.3)]
    sizes = [(300, 100), (600, 200), (1200, 400)]
    trials = 200
    worst_margin = -math.inf
    passed = True
    for k, eps in grid:
        for n, m in sizes:
            results = {}
            for test in ("np", "scheffe", "huber", "birge"):
                cfg = ExperimentConfig(
                    class_tag="db", eps=eps, k=k, n_grid=(n,), m_grid=(m,),
                    trials=trials, base_seed=31, test=test,
                )
                point = estimate_error(cfg, n, m)
                var = (
                    point.err1 * (1 - point.err1) + point.err2 * (1 - point.err2)
                ) / trials
                results[test] = (point.err_total, var)
            np_err, np_var = results["np"]
            for test in ("scheffe", "huber", "birge"):
                base_err, base_var = results[test]
                margin = np_err - base_err - 3 * math.sqrt(np_var + base_var)
                worst_margin = max(worst_margin, margin)
                passed = passed and margin <= 0
    report(
        "criterion 8: likelihood-oracle dominance", passed,
        f"worst dominance margin {worst_margin:+.4f} over 9 grid points x 3 baselines",
        started,
    )
    assert passed


def test_criterion_9_pvalue_uniformity():
    started = time.time()
    base = make_discrete_pmf(generator(123).random(50) + 0.2)
    pvals = []
    for t in range(2000):
        x = sample(base, 40, derive_seed(9, t, "x"))
        y = sample(base, 40, derive_seed(9, t, "y"), Source.Y)
        z = sample(base, 37, derive_seed(9, t, "z"), Source.Z)
        pvals.append(permutation_pvalue(x, y, z, 99, derive_seed(9, t, "p")).p_value)
    p = np.sort(pvals)
    grid = np.arange(1, len(p) + 1) / len(p)
    ks = max(float(np.abs(grid - p).max()), float(np.abs(grid - 1 / len(p) - p).max()))
    passed = ks <= 0.05
    report(
        "criterion 9: p-value uniformity", passed,
        f"KS distance {ks:.4f} over 2000 null p-values at P=99", started,
    )
    assert passed


def _gauss_quadrature_kl_chi2(a: float, b: float) -> tuple[float, float]:
    xs, ws = np.polynomial.legendre.leggauss(160)
    lo, hi = min(a, b) - 12.0, max(a, b) + 12.0
    x = (xs + 1) / 2 * (hi - lo) + lo
    w = ws / 2 * (hi - lo)
    p = np.exp(-((x - a) ** 2) / 2) / math.sqrt(2 * math.pi)
    q = np.exp(-((x - b) ** 2) / 2) / math.sqrt(2 * math.pi)
    return float(np.sum(w * p * np.log(p / q))), float(np.sum(w * (p - q) ** 2 / q))


def test_criterion_10_gaussian_forms_and_projection():
    started = time.time()
    rng = generator(42)
    worst_gap = 0.0
    for _ in range(50):
        r = int(rng.integers(1, 5))
        t1 = rng.normal(0, 0.3, r)
        t2 = rng.normal(0, 0.3, r)
        forms = gaussian_divergences(t1, t2)
        kl_q = 0.0
        chi_factor = 1.0
        for a, b in zip(t1, t2):
            kl_1d, chi_1d = _gauss_quadrature_kl_chi2(a, b)
            kl_q += kl_1d
            chi_factor *= 1 + chi_1d
        worst_gap = max(worst_gap, abs(kl_q - forms.kl), abs(chi_factor - 1 - forms.chi2))
    forms_ok = worst_gap <= 1e-6

    worst_excess = -math.inf
    for i in range(50):
        _, f = smooth_bump_pair(1.0, 1, 2.0, 0.25, seed=derive_seed(10, i))
        _, g = smooth_bump_pair(1.0, 1, 2.0, 0.25, seed=derive_seed(11, i))
        h_true = math.sqrt(quad_hellinger_sq(f, g))
        kappa = 2 * f.kappa
        h_proj = hellinger(project_grid(f, kappa), project_grid(g, kappa))
        worst_excess = max(worst_excess, h_proj - h_true)
    contraction_ok = worst_excess <= 1e-6
    passed = forms_ok and contraction_ok
    report(
        "criterion 10: gaussian closed forms + projection contraction", passed,
        f"worst closed-form gap {worst_gap:.2e}, worst contraction excess "
        f"{worst_excess:.2e}",
        started,
    )
    assert passed


def test_criterion_11_multinomial_product_bound():
    started = time.time()
    res = check_multinomial_bound(n_draws=100_000)
    report("criterion 11: multinomial product bound", res.passed, res.detail, started)
    assert res.passed, res.detail
