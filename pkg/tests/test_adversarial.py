import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import discrete_sample
from lfht_lab.adversarial import (
    ClassTag,
    fingerprint,
    gaussian_gof_kl,
    gaussian_lfht_kl,
    gaussian_prior_instance,
    ingster_chi2_exponent,
    moments,
    paninski_instance,
    paninski_pair,
    prior_constants,
    smooth_bump_instance,
    valiant_pair,
)
from lfht_lab.dist import ConstructionError, uniform_pmf
from lfht_lab.divergence import tv
from lfht_lab.rng import generator


class TestPaninskiPair:
    def test_displayed_weights(self):
        _, p_eta = paninski_pair(2, 0.5, eta=np.array([1, 1]))
        np.testing.assert_allclose(p_eta.weights, [0.375, 0.125, 0.375, 0.125])

    def test_eps_zero_gives_uniform(self):
        p0, p_eta = paninski_pair(3, 0.0, eta=np.array([1, -1, 1]))
        np.testing.assert_allclose(p_eta.weights, p0.weights)

    def test_inner_product_identity_exact(self):
        # rational arithmetic: sum_j p(j) p'(j) = (1 + eps^2 <eta, eta'> / k) / 2k
        rng = generator(2)
        eps = Fraction(2, 5)
        for k in range(1, 9):
            eta = rng.choice((-1, 1), size=k)
            eta2 = rng.choice((-1, 1), size=k)

            def weight(e, j, odd):
                val = 1 + int(e[j]) * eps if odd else 1 - int(e[j]) * eps
                return val / (2 * k)

            lhs = sum(
                weight(eta, j, odd) * weight(eta2, j, odd)
                for j in range(k)
                for odd in (True, False)
            )
            inner = int(np.dot(eta, eta2))
            rhs = (1 + eps**2 * inner / k) / (2 * k)
            assert lhs == rhs

    def test_instance_audit(self):
        inst = paninski_instance(16, 0.3, seed=4)
        assert inst.audit_separation() >= inst.separation - 1e-9
        assert inst.separation == pytest.approx(0.15, abs=1e-12)


class TestValiantPair:
    def test_masses_and_tv(self):
        p, q = valiant_pair(k=4096, n=10, m=5, eps=0.3)
        assert p.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert q.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert tv(p, q) == pytest.approx(0.3, abs=1e-9)

    def test_heavy_parts_identical(self):
        p, q = valiant_pair(k=4096, n=10, m=5, eps=0.3)
        gamma = 1000
        np.testing.assert_array_equal(p.weights[:gamma], q.weights[:gamma])

    def test_preconditions(self):
        with pytest.raises(ConstructionError):
            valiant_pair(k=100, n=10, m=5, eps=0.3)  # alphabet too small
        with pytest.raises(ConstructionError):
            valiant_pair(k=4096, n=5, m=10, eps=0.3)  # m > n
        with pytest.raises(ConstructionError):
            valiant_pair(k=4096, n=10, m=5, eps=0.7)


class TestGaussianPrior:
    def test_constants_satisfy_equations(self):
        for s, c in ((1.0, 1.0), (2.0, 5.0), (0.5, 0.3)):
            c1, c2 = prior_constants(s, c)
            assert 100 * c1 * c2 ** (2 * s + 1) == pytest.approx(c, rel=1e-12)
            assert c1 * c2 == pytest.approx(2.0, rel=1e-12)

    def test_gamma_total_near_two_eps_sq(self):
        # sum gamma = c1 c2 eps^2 up to one bin of rounding
        inst = gaussian_prior_instance(1.0, 1.0, 0.02, seed=5)
        gamma_val = inst.metadata["gamma"]
        r = inst.metadata["r"]
        assert abs(gamma_val * r - 2 * 0.02**2) <= gamma_val

    def test_acceptance_rate(self):
        # resampling acceptance at the documented parameter point
        accepted = 0
        draws = 10_000
        rng = generator(99)
        c1, c2 = prior_constants(1.0, 1.0)
        r = max(1, math.ceil(c2 * 10.0))
        gamma_val = c1 * 0.1**3
        for _ in range(draws):
            theta = rng.standard_normal(r) * math.sqrt(gamma_val)
            sob = np.sum(np.arange(1, r + 1) ** 2 * theta**2)
            ok = sob <= 1.0 and np.linalg.norm(theta) >= 0.05 * 0.1
            accepted += ok
        assert accepted / draws >= 0.95

    def test_support_length_limit(self):
        # as smoothness grows with eps fixed, the support-length formula tends to c2
        eps = 0.1
        lengths = [prior_constants(s, 1.0)[1] * eps ** (-1.0 / s) for s in (1, 4, 16, 64)]
        limits = [prior_constants(s, 1.0)[1] for s in (1, 4, 16, 64)]
        assert abs(lengths[-1] - limits[-1]) < 0.2

    def test_instance_valid(self):
        inst = gaussian_prior_instance(1.0, 1.0, 0.1, seed=6)
        assert inst.class_tag is ClassTag.P_G
        assert inst.py.in_ellipsoid()
        assert inst.metadata["attempts"] <= 1000
        assert inst.audit_separation() >= inst.separation - 1e-12


class TestFingerprint:
    def test_single_sample(self):
        fp = fingerprint([discrete_sample([1, 1, 2], k=3)], k=3)
        assert fp.counts == {(2,): 1, (1,): 1, (0,): 1}

    def test_total_bins(self):
        fp = fingerprint(
            [discrete_sample([1, 2, 2], k=5), discrete_sample([3], k=5)], k=5
        )
        assert fp.total_bins() == 5

    def test_permutation_invariance(self):
        rng = generator(8)
        k = 12
        obs_a = rng.integers(1, k + 1, size=30)
        obs_b = rng.integers(1, k + 1, size=18)
        perm = rng.permutation(k) + 1
        fp = fingerprint(
            [discrete_sample(obs_a, k), discrete_sample(obs_b, k)], k
        )
        fp_perm = fingerprint(
            [discrete_sample(perm[obs_a - 1], k), discrete_sample(perm[obs_b - 1], k)],
            k,
        )
        assert fp.counts == fp_perm.counts

    def test_csv_export(self, tmp_path):
        fp = fingerprint([discrete_sample([1, 1, 2], k=3)], k=3)
        out = tmp_path / "fp.csv"
        fp.to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "tuple,count"
        assert len(lines) == 4


class TestMoments:
    def test_all_zero_tuple(self):
        dists = [uniform_pmf(7), uniform_pmf(7)]
        assert moments(dists, (3, 5), (0, 0)) == 7

    def test_single_uniform(self):
        assert moments([uniform_pmf(10)], (4,), (1,)) == pytest.approx(4.0)

    def test_valiant_zero_tuple_normalization(self):
        p, q = valiant_pair(k=2048, n=5, m=3, eps=0.25)
        value = moments([p, q, p], (7, 7, 4), (0, 0, 0))
        assert value == 2048  # a+c=0, b=0 tuple counts every bin

    def test_mismatched_inputs(self):
        with pytest.raises(ConstructionError):
            moments([uniform_pmf(4)], (2, 3), (1, 1))


class TestMixtureCalculators:
    def test_zero_gamma(self):
        assert gaussian_gof_kl(10, np.zeros(5)) == 0
        assert gaussian_lfht_kl(10, 7, np.zeros(5)) == 0

    def test_gof_log_growth(self):
        # for n*gamma >> 1 each term approaches (log(n g) - 1)/2
        g = np.array([5.0])
        val = gaussian_gof_kl(10**6, g)
        assert val == pytest.approx(0.5 * (math.log(10**6 * 5) - 1), rel=1e-5)

    def test_exponent_formula(self):
        assert ingster_chi2_exponent(10, 0.5, 4, 2) == 100 * 0.5**4 * 16

    def test_lfht_kl_dominated_by_quadratic(self):
        # the log(1+x) >= x - x^2 step gives sum(g^2 m^2 + g^2 m n) as an upper bound
        rng = generator(13)
        for _ in range(200):
            gamma = rng.random(int(rng.integers(1, 6))) * rng.choice([0.01, 0.1, 1.0, 10.0])
            n = int(rng.integers(1, 2000))
            m = int(rng.integers(1, 2000))
            bound = float(np.sum(gamma**2 * m**2 + gamma**2 * m * n))
            assert gaussian_lfht_kl(n, m, gamma) <= bound + 1e-12
            assert gaussian_lfht_kl(n, m, gamma) >= 0


class TestSmoothBumpInstance:
    def test_audit(self):
        inst = smooth_bump_instance(1.0, 1, 2.0, 0.3, seed=14)
        measured = inst.audit_separation()
        assert measured >= inst.separation - 1e-4
