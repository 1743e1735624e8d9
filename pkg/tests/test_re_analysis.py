import math

import numpy as np
import pytest

from csnc.mathcore import Seed
from csnc.re_analysis import (
    ConeSpec,
    cascade_check,
    cone_membership_margin,
    constant_c,
    error_bound,
    estimate_re,
    sample_cone_vector,
    save_re_report,
)


class TestConeSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ConeSpec(5, ())
        with pytest.raises(ValueError):
            ConeSpec(5, (7,))
        with pytest.raises(ValueError):
            ConeSpec(5, (1,), alpha=0.5)

    def test_complement(self):
        spec = ConeSpec(5, (0, 3))
        assert list(spec.complement) == [1, 2, 4]


class TestSampleConeVector:
    def test_membership_is_exact(self):
        for i in range(50):
            spec = ConeSpec(12, (0, 2, 5), alpha=1.0)
            y = sample_cone_vector(spec, Seed(1, i))
            assert cone_membership_margin(y, spec) >= -1e-12
            assert abs(np.linalg.norm(y) - 1.0) < 1e-12

    def test_full_support_is_vacuous(self):
        spec = ConeSpec(6, tuple(range(6)), alpha=1.0)
        y = sample_cone_vector(spec, Seed(2))
        assert abs(np.linalg.norm(y) - 1.0) < 1e-12

    def test_zero_slack_stays_on_support(self):
        spec = ConeSpec(10, (1, 4), alpha=2.0)
        y = sample_cone_vector(spec, Seed(3), slack=0.0)
        off = spec.complement
        assert np.all(y[off] == 0.0)

    def test_slack_validation(self):
        with pytest.raises(ValueError):
            sample_cone_vector(ConeSpec(4, (0,)), Seed(0), slack=1.5)


class TestEstimateRe:
    def test_identity_design(self):
        p = 8
        est = estimate_re(np.eye(p), sparsity=2, alpha=1.0, num_supports=50,
                          num_vectors_per_support=10, seed=Seed(4))
        assert est.gamma_hat == pytest.approx(1.0 / p, rel=1e-10)

    def test_zero_column_gives_zero(self):
        rng = Seed(5).rng()
        G = rng.normal(size=(6, 6))
        G[:, 3] = 0.0
        est = estimate_re(G, sparsity=1, num_supports=6, num_vectors_per_support=5, seed=Seed(6))
        assert est.gamma_hat == pytest.approx(0.0, abs=1e-12)

    def test_gaussian_matrices_satisfy_re_empirically(self):
        hits = 0
        for i in range(100):
            G = Seed(7, i).rng().normal(size=(60, 200))
            est = estimate_re(G, sparsity=5, alpha=1.0, num_supports=20,
                              num_vectors_per_support=20, seed=Seed(8, i))
            if est.gamma_hat > 0.1:
                hits += 1
        assert hits >= 95

    def test_argmin_attains_gamma(self):
        G = Seed(9).rng().normal(size=(12, 18))
        est = estimate_re(G, sparsity=3, num_supports=10, num_vectors_per_support=10, seed=Seed(10))
        y = est.argmin_vector
        ratio = float((G @ y) @ (G @ y)) / 12 / float(y @ y)
        assert ratio == pytest.approx(est.gamma_hat, rel=1e-10)
        assert cone_membership_margin(y, ConeSpec(18, est.argmin_support, est.alpha)) >= -1e-10

    def test_monotone_refinement(self):
        # more sampling can only lower the estimate (same seed prefix)
        G = Seed(11).rng().normal(size=(10, 14))
        small = estimate_re(G, 2, 1.0, num_supports=5, num_vectors_per_support=10, seed=Seed(12))
        big = estimate_re(G, 2, 1.0, num_supports=5, num_vectors_per_support=40, seed=Seed(12))
        assert big.gamma_hat <= small.gamma_hat + 1e-15

    def test_exhaustive_enumeration_for_small_p(self):
        G = Seed(13).rng().normal(size=(8, 6))
        est = estimate_re(G, 2, 1.0, num_supports=100, num_vectors_per_support=5, seed=Seed(14))
        assert len(est.per_support_gamma) == math.comb(6, 2)

    def test_scaled_orthonormal_rows_bounds(self):
        # G = sqrt(q) Q with orthonormal rows: ratio <= 1 on the whole cone
        q, p = 6, 10
        rng = Seed(15).rng()
        Q, _ = np.linalg.qr(rng.normal(size=(p, q)))
        G = math.sqrt(q) * Q.T
        est = estimate_re(G, 2, 1.0, num_supports=100, num_vectors_per_support=20, seed=Seed(16))
        assert est.gamma_hat <= 1.0 + 1e-9
        exact_floor = min(g for _, g in est.per_support_gamma if True)
        assert est.gamma_hat <= exact_floor + 1e-12

    def test_invalid_sparsity(self):
        with pytest.raises(ValueError):
            estimate_re(np.eye(4), 5, seed=Seed(0))

    def test_report_csv(self, tmp_path):
        G = Seed(17).rng().normal(size=(6, 8))
        est = estimate_re(G, 2, 1.0, num_supports=5, num_vectors_per_support=5, seed=Seed(18))
        path = str(tmp_path / "re.csv")
        save_re_report(est, path)
        text = open(path).read()
        assert "OVERALL" in text
        assert text.startswith("support,gamma")


class TestCascadeCheck:
    def _setup(self, seed, q=20, p=40, k=3):
        s = Seed(seed)
        G = s.child(0).rng().normal(size=(q, p))
        support = tuple(np.sort(s.child(1).rng().choice(p, size=k, replace=False)))
        return G, ConeSpec(p, support, 1.0), s

    def test_scalar_c1_gives_exact_equality(self):
        G, spec, s = self._setup(20)
        C1 = 2.0 * np.eye(20)
        C2 = np.eye(40)
        rep = cascade_check(G, C1, C2, spec, num_vectors=50, seed=s.child(2))
        assert rep.violations_left == 0
        assert rep.lambda1 == pytest.approx(2.0)
        # the LEFT inequality is tight: ||2Gy||^2 == 4 ||Gy||^2

    def test_identity_matrices_no_violations(self):
        G, spec, s = self._setup(21)
        rep = cascade_check(G, np.eye(20), np.eye(40), spec, num_vectors=100, seed=s.child(2))
        assert rep.violations_left == 0
        assert rep.violations_right == 0
        assert rep.membership_skipped == 0

    def test_random_triples_never_violate_left(self):
        total_checked = 0
        for i in range(40):
            G, spec, s = self._setup(100 + i)
            rng = s.child(5).rng()
            C1 = np.eye(20) + 0.3 * rng.normal(size=(20, 20)) / math.sqrt(20)
            C2 = np.eye(40) + 0.3 * rng.normal(size=(40, 40)) / math.sqrt(40)
            rep = cascade_check(G, C1, C2, spec, num_vectors=50, seed=s.child(6))
            assert rep.violations_left == 0
            assert rep.violations_right == 0
            total_checked += rep.samples - rep.membership_skipped
        assert total_checked > 200  # membership passes often enough to be informative

    def test_dimension_validation(self):
        G, spec, s = self._setup(22)
        with pytest.raises(ValueError):
            cascade_check(G, np.eye(19), np.eye(40), spec, 10, Seed(0))
        with pytest.raises(ValueError):
            cascade_check(G, np.eye(20), np.eye(39), spec, 10, Seed(0))


class TestErrorBound:
    def test_noiseless_is_zero(self):
        assert error_bound(1.0, 0.5, 0.0, 5, 100, 50) == 0.0

    def test_doubling_q_halves(self):
        a = error_bound(1.0, 0.5, 1.0, 5, 100, 50)
        b = error_bound(1.0, 0.5, 1.0, 5, 100, 100)
        assert a == pytest.approx(2.0 * b, rel=1e-12)

    def test_direct_value(self):
        # (1 / 0.25) * 5 * ln(1000) / 100
        expected = 4.0 * 5.0 * math.log(1000) / 100
        assert error_bound(1.0, 0.5, 1.0, 5, 1000, 100) == pytest.approx(expected, rel=1e-12)

    def test_failed_re_condition(self):
        with pytest.raises(ValueError):
            error_bound(1.0, 0.0, 1.0, 5, 100, 50)


class TestConstantC:
    def test_unit_case(self):
        assert constant_c(3.7, 1, 1, 1, 1, 1, 1) == pytest.approx(3.7)

    def test_fourth_power_homogeneity(self):
        base = constant_c(1.0, 0.5, 0.5, 0.8, 0.8, 1.25, 1.25)
        doubled = constant_c(1.0, 0.5, 0.5, 1.6, 0.8, 1.25, 1.25)
        assert base / doubled == pytest.approx(16.0, rel=1e-12)

    def test_direct_value_two_orderings(self):
        # delta (lam3 lam4)^2 / ((g1 g2)^2 (lam1 lam2)^4), evaluated two ways
        a = (1.25 * 1.25) ** 2 / ((0.5 * 0.5) ** 2 * (0.8 * 0.8) ** 4)
        b = 1.25**2 * 1.25**2 / (0.5**2 * 0.5**2 * 0.8**4 * 0.8**4)
        got = constant_c(1.0, 0.5, 0.5, 0.8, 0.8, 1.25, 1.25)
        assert got == pytest.approx(a, rel=1e-12)
        assert got == pytest.approx(b, rel=1e-12)
        assert got == pytest.approx(232.8306436538696, rel=1e-10)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            constant_c(1.0, 0.0, 1, 1, 1, 1, 1)
