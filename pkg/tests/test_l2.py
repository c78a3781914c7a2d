import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import discrete_sample, random_pmf
from lfht_lab.adversarial import ClassTag, gaussian_prior_instance
from lfht_lab.bump import SmoothBumpDensity, uniform_bump_density
from lfht_lab.dist import (
    ConstructionError,
    SampleKind,
    SampleSet,
    Source,
    make_discrete_pmf,
    sample,
)
from lfht_lab.gauss import GaussianSequenceSpec
from lfht_lab.l2 import (
    ClassConfig,
    empirical_projection,
    gaussian_basis,
    gaussian_truncation,
    histogram_basis,
    identity_basis,
    lfht_test,
    mean_var_oracle,
    smooth_resolution,
    t_lf,
)
from lfht_lab.rng import derive_seed, generator
from lfht_lab.verify import exact_tlf_mean_enumeration, formula_tlf_mean


def seq_sample(matrix, source=Source.X):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    return SampleSet(source, SampleKind.SEQUENCE, matrix.shape[1], matrix)


class TestEmpiricalProjection:
    def test_discrete_counting(self):
        coef = empirical_projection(discrete_sample([1, 1, 2], 3), identity_basis(3))
        np.testing.assert_allclose(coef, [2 / 3, 1 / 3, 0])

    def test_gaussian_constant_vectors(self):
        v = np.array([0.5, -1.0, 2.0])
        s = seq_sample(np.tile(v, (7, 1)))
        np.testing.assert_allclose(
            empirical_projection(s, gaussian_basis(2)), v[:2]
        )

    def test_histogram_scaling(self):
        s = SampleSet(Source.X, SampleKind.CUBE, 1, np.array([[0.1], [0.6]]))
        coef = empirical_projection(s, histogram_basis(2, 1))
        np.testing.assert_allclose(coef, [math.sqrt(2) / 2, math.sqrt(2) / 2])

    def test_unbiasedness_mc(self):
        pmf = make_discrete_pmf([0.5, 0.3, 0.2])
        s = sample(pmf, 10_000, seed=3)
        coef = empirical_projection(s, identity_basis(3))
        assert np.abs(coef - pmf.weights).max() < 0.02

    def test_kind_mismatch(self):
        with pytest.raises(ConstructionError):
            empirical_projection(discrete_sample([1], 2), gaussian_basis(2))


class TestTlf:
    def test_same_sample_ties_to_null(self):
        x = discrete_sample([1, 2], 2)
        rep = t_lf(x, x, discrete_sample([1, 1], 2), identity_basis(2))
        assert rep.t_lf == 0
        assert rep.decision == 0

    def test_small_case_value(self):
        x = discrete_sample([1, 1], 2)
        y = discrete_sample([2, 2], 2)
        z = discrete_sample([1, 1], 2)
        rep = t_lf(x, y, z, identity_basis(2))
        assert rep.t_lf == pytest.approx(-2.0)
        assert rep.decision == 0

    def test_preconditions(self):
        x = discrete_sample([1], 2)
        with pytest.raises(ConstructionError):
            t_lf(x, x, x, identity_basis(2))
        x2 = discrete_sample([1, 2], 2)
        with pytest.raises(ConstructionError):
            t_lf(x2, x2, discrete_sample([], 2), identity_basis(2))

    @given(
        st.lists(st.integers(1, 4), min_size=2, max_size=10),
        st.lists(st.integers(1, 4), min_size=2, max_size=10),
        st.lists(st.integers(1, 4), min_size=1, max_size=6),
    )
    def test_antisymmetry(self, xs, ys, zs):
        n = min(len(xs), len(ys))
        x, y = discrete_sample(xs[:n], 4), discrete_sample(ys[:n], 4)
        z = discrete_sample(zs, 4)
        basis = identity_basis(4)
        assert t_lf(x, y, z, basis).t_lf_nodiag == pytest.approx(
            -t_lf(y, x, z, basis).t_lf_nodiag, abs=1e-12
        )

    def test_diagonal_zero_for_indicator_bases(self):
        rng = generator(4)
        x = discrete_sample(rng.integers(1, 6, 20), 5)
        y = discrete_sample(rng.integers(1, 6, 20), 5)
        z = discrete_sample(rng.integers(1, 6, 9), 5)
        rep = t_lf(x, y, z, identity_basis(5))
        assert rep.diagonal == 0.0
        assert rep.t_lf == rep.t_lf_nodiag

    def test_gaussian_decomposition_identity(self):
        rng = generator(5)
        x = seq_sample(rng.normal(size=(6, 4)))
        y = seq_sample(rng.normal(size=(6, 4)), Source.Y)
        z = seq_sample(rng.normal(size=(3, 4)), Source.Z)
        rep = t_lf(x, y, z, gaussian_basis(3))
        assert rep.t_lf == pytest.approx(rep.t_lf_nodiag + rep.diagonal, abs=1e-12)
        assert rep.diagonal != 0.0

    def test_permutation_invariance(self):
        rng = generator(6)
        k = 7
        xs = rng.integers(1, k + 1, 15)
        ys = rng.integers(1, k + 1, 15)
        zs = rng.integers(1, k + 1, 8)
        perm = rng.permutation(k) + 1
        basis = identity_basis(k)
        base = t_lf(
            discrete_sample(xs, k), discrete_sample(ys, k), discrete_sample(zs, k), basis
        )
        relabeled = t_lf(
            discrete_sample(perm[xs - 1], k),
            discrete_sample(perm[ys - 1], k),
            discrete_sample(perm[zs - 1], k),
            basis,
        )
        assert base.t_lf == pytest.approx(relabeled.t_lf, abs=1e-15)
        assert base.decision == relabeled.decision

    def test_gaussian_truncation_contract(self):
        rng = generator(7)
        x = rng.normal(size=(5, 6))
        y = rng.normal(size=(5, 6))
        z = rng.normal(size=(4, 6))
        basis = gaussian_basis(3)
        base = t_lf(seq_sample(x), seq_sample(y), seq_sample(z), basis)
        x2, y2, z2 = x.copy(), y.copy(), z.copy()
        for arr in (x2, y2, z2):
            arr[:, 3:] = 99.0  # beyond the truncation: must not matter
        shifted = t_lf(seq_sample(x2), seq_sample(y2), seq_sample(z2), basis)
        assert base.t_lf == shifted.t_lf
        assert base.diagonal == shifted.diagonal


class TestMeanVarOracle:
    def test_equal_sources_zero_mean(self):
        p = make_discrete_pmf([0.2, 0.5, 0.3])
        h = make_discrete_pmf([0.6, 0.2, 0.2])
        oracle = mean_var_oracle(p, p, h, 5, 4, identity_basis(3))
        assert oracle.mean == 0.0

    def test_substitution_case(self):
        f = make_discrete_pmf([0.2, 0.5, 0.3])
        g = make_discrete_pmf([0.5, 0.25, 0.25])
        oracle = mean_var_oracle(f, g, f, 6, 3, identity_basis(3))
        expected = -float(np.sum((g.weights - f.weights) ** 2)) + (
            float(np.sum(g.weights**2)) - float(np.sum(f.weights**2))
        ) / 6
        assert oracle.mean == pytest.approx(expected, abs=1e-15)

    def test_var_terms_nonnegative(self):
        rng = generator(8)
        f, g, h = (random_pmf(rng, 6) for _ in range(3))
        oracle = mean_var_oracle(f, g, h, 9, 7, identity_basis(6))
        assert all(v >= 0 for v in oracle.var_terms.values())
        assert set(oracle.var_terms) == {"1/n", "1/m", "1/nm", "1/n^2", "1/n^3"}

    def test_enumeration_matches_formula_small_support(self):
        # rational pmfs with three support points, alphabet up to 6: the
        # surplus bins carry no mass and cancel from both sides
        f_w = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
        g_w = [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
        h_w = [Fraction(2, 5), Fraction(2, 5), Fraction(1, 5)]
        for n in (2, 3, 4):
            for m in (1, 2, 3):
                enum = exact_tlf_mean_enumeration(f_w, g_w, h_w, n, m)
                formula = formula_tlf_mean(f_w, g_w, h_w, n)
                assert enum == formula

    def test_mc_agreement_histogram_basis(self):
        rng = generator(9)
        eta_f = rng.choice(np.array([-1, 1], dtype=np.int8), size=4)
        eta_g = rng.choice(np.array([-1, 1], dtype=np.int8), size=4)
        f = SmoothBumpDensity(d=1, beta=1.0, kappa=4, rho=0.1, eta=eta_f)
        g = SmoothBumpDensity(d=1, beta=1.0, kappa=4, rho=0.1, eta=eta_g)
        h = uniform_bump_density(1, 1.0, 4)
        basis = histogram_basis(8, 1)
        n, m, trials = 12, 9, 4000
        oracle = mean_var_oracle(f, g, h, n, m, basis)
        stats = np.empty(trials)
        for t in range(trials):
            x = sample(f, n, derive_seed(70, t, "x"))
            y = sample(g, n, derive_seed(70, t, "y"), Source.Y)
            z = sample(h, m, derive_seed(70, t, "z"), Source.Z)
            stats[t] = t_lf(x, y, z, basis).t_lf_nodiag
        se = stats.std(ddof=1) / math.sqrt(trials)
        assert abs(stats.mean() - oracle.mean) <= 4 * se
        assert stats.var(ddof=1) <= oracle.var_bound

    def test_mc_agreement_gaussian_basis(self):
        theta_f = np.array([0.4, -0.2, 0.1])
        theta_g = np.array([-0.1, 0.3, 0.0])
        theta_h = np.array([0.2, 0.0, -0.1])
        f = GaussianSequenceSpec(theta=theta_f, s=1.0, c_sob=5.0)
        g = GaussianSequenceSpec(theta=theta_g, s=1.0, c_sob=5.0)
        h = GaussianSequenceSpec(theta=theta_h, s=1.0, c_sob=5.0)
        basis = gaussian_basis(3)
        n, m, trials = 10, 6, 4000
        oracle = mean_var_oracle(f, g, h, n, m, basis)
        stats = np.empty(trials)
        for t in range(trials):
            x = sample(f, n, derive_seed(71, t, "x"))
            y = sample(g, n, derive_seed(71, t, "y"), Source.Y)
            z = sample(h, m, derive_seed(71, t, "z"), Source.Z)
            stats[t] = t_lf(x, y, z, basis).t_lf_nodiag
        se = stats.std(ddof=1) / math.sqrt(trials)
        assert abs(stats.mean() - oracle.mean) <= 4 * se
        assert stats.var(ddof=1) <= oracle.var_bound


class TestClassDispatch:
    def test_resolution_formulas(self):
        assert smooth_resolution(0.25, 1.0) == 4
        assert gaussian_truncation(0.5, 1.0, 1.0) == 8

    def test_identical_streams_zero(self):
        obs = discrete_sample([1, 2, 3, 1], 4)
        cfg = ClassConfig(tag=ClassTag.P_DB, eps=0.3, k=4)
        rep = lfht_test(obs, obs, obs, cfg)
        assert rep.t_lf == 0.0
        assert rep.decision == 0

    def test_gaussian_power(self):
        inst = gaussian_prior_instance(1.0, 1.0, 0.5, seed=10)
        cfg = ClassConfig(tag=ClassTag.P_G, eps=0.5, s=1.0, c_sob=1.0)
        hits = 0
        trials = 200
        for t in range(trials):
            x = sample(inst.px, 500, derive_seed(72, t, "x"))
            y = sample(inst.py, 500, derive_seed(72, t, "y"), Source.Y)
            z = sample(inst.px, 500, derive_seed(72, t, "z"), Source.Z)
            hits += lfht_test(x, y, z, cfg).decision == 0
        assert hits / trials >= 0.9

    def test_smooth_fairness_at_rho_zero(self):
        base = uniform_bump_density(1, 1.0, 1)
        cfg = ClassConfig(tag=ClassTag.P_H, eps=0.4, beta=1.0, d=1)
        trials = 400
        ones = 0
        for t in range(trials):
            x = sample(base, 60, derive_seed(73, t, "x"))
            y = sample(base, 60, derive_seed(73, t, "y"), Source.Y)
            z = sample(base, 40, derive_seed(73, t, "z"), Source.Z)
            ones += lfht_test(x, y, z, cfg).decision
        # symmetric null: decision frequency within 3 sigma of one half
        sigma = math.sqrt(0.25 / trials)
        assert abs(ones / trials - 0.5) <= 3 * sigma
