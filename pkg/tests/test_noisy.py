import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairauc.auc import bias, fld_auc, pair_auc
from fairauc.bounds import beta_of
from fairauc.exceptions import RangeError
from fairauc.instances import check_noise, check_pareto, noise_instance
from fairauc.moments import ClassStats
from fairauc.noisy import (
    achievable_bias_range,
    auc_with_noise,
    base_auc,
    noise_plan,
    noisy_feature,
    noisy_stats,
    remark_scaling,
    solve_lambda,
    target_bias_lambda,
)


def pair(dmu, sum_diag=(1.0, 1.0), cov=0.0):
    half = np.array([[sum_diag[0], cov], [cov, sum_diag[1]]]) / 2
    return ClassStats(np.zeros(2), dmu, half, half)


CASE_A = (pair([0.5, 0.2]), pair([0.3, 1.0]))
CASE_B = (pair([0.2, 0.1]), pair([1.0, 1.0]))


class TestNoisyFeature:
    def test_lambda_one_identity(self, rng):
        z = rng.normal(size=100)
        out = noisy_feature(z, np.arange(100) % 2 == 0, 1.0, rng)
        np.testing.assert_array_equal(out, z)

    def test_lambda_zero_pure_noise(self):
        r = np.random.default_rng(1)
        n = 200_000
        z = 5 + 3 * r.normal(size=n)
        mask = np.arange(n) < n // 2
        out = noisy_feature(z, mask, 0.0, np.random.default_rng(2))
        np.testing.assert_array_equal(out[~mask], z[~mask])
        noise = out[mask]
        se = 1 / math.sqrt(noise.size)
        assert abs(noise.mean()) < 3 * se
        assert abs(noise.var() - 1) < 3 * math.sqrt(2) * se
        assert abs(np.corrcoef(noise, z[mask])[0, 1]) < 3 * se

    @pytest.mark.parametrize("lam", [0.25, 0.6])
    def test_variance_large_n(self, lam):
        r = np.random.default_rng(3)
        n = 400_000
        sigma2 = 2.5
        z = math.sqrt(sigma2) * r.normal(size=n)
        out = noisy_feature(z, np.ones(n, bool), lam, r)
        expected = lam ** 2 * sigma2 + (1 - lam) ** 2
        se = expected * math.sqrt(2 / n)
        assert abs(out.var() - expected) < 3 * se

    def test_rejects_bad_lambda(self, rng):
        with pytest.raises(ValueError):
            noisy_feature(np.zeros(3), np.ones(3, bool), 1.5, rng)


class TestAucWithNoise:
    def test_endpoints(self):
        st2 = pair([0.4, 0.9], (1.2, 0.8), 0.3)
        assert auc_with_noise(st2, 0.0) == pytest.approx(base_auc(st2))
        assert auc_with_noise(st2, 1.0) == pytest.approx(pair_auc(st2))

    def test_intermediate_monte_carlo(self):
        s0 = np.array([[0.6, 0.2], [0.2, 0.9]])
        s1 = np.array([[0.8, -0.1], [-0.1, 0.5]])
        st2 = ClassStats([0.0, 0.0], [0.7, 0.9], s0, s1)
        lam = 0.5
        got = auc_with_noise(st2, lam)
        lo, hi = sorted((auc_with_noise(st2, 0.0), auc_with_noise(st2, 1.0)))
        assert lo < got < hi
        r = np.random.default_rng(21)
        n = 1_000_000
        x0 = r.multivariate_normal(st2.mu0, s0, n)
        x1 = r.multivariate_normal(st2.mu1, s1, n)
        x0[:, 1] = lam * x0[:, 1] + (1 - lam) * r.normal(size=n)
        x1[:, 1] = lam * x1[:, 1] + (1 - lam) * r.normal(size=n)
        # best direction from the simulated moments, scored on independent pairs
        w = np.linalg.solve(np.cov(x0.T) + np.cov(x1.T), x1.mean(0) - x0.mean(0))
        assert np.mean(x1 @ w > x0 @ w) == pytest.approx(got, abs=0.005)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_monotone_in_lambda(self, seed):
        st2 = noise_instance(np.random.default_rng(seed))[0]
        vals = [auc_with_noise(st2, lam) for lam in np.linspace(0, 1, 11)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_noisy_stats_moments(self):
        st2 = ClassStats([1.0, 2.0], [1.5, 3.0], [[1.0, 0.4], [0.4, 2.0]], np.eye(2))
        ns = noisy_stats(st2, 0.5)
        np.testing.assert_allclose(ns.mu1, [1.5, 1.5])
        assert ns.sigma0[1, 1] == pytest.approx(0.25 * 2.0 + 0.25)
        assert ns.sigma0[0, 1] == pytest.approx(0.2)


class TestPlans:
    def test_equal(self):
        st2 = pair([0.3, 0.5])
        plan = noise_plan(st2, st2)
        assert plan.lam == 1.0 and plan.achieved_bias == 0.0 and plan.case == "equal"

    def test_case_b(self):
        plan = noise_plan(*CASE_B)
        assert plan.case == "B" and plan.lam == 0.0 and plan.advantaged == 1
        assert plan.auc_b == pytest.approx(base_auc(CASE_B[1]))
        assert plan.auc_a == pytest.approx(fld_auc(CASE_B[0]))

    def test_case_a(self):
        plan = noise_plan(*CASE_A)
        assert plan.case == "A" and 0 < plan.lam < 1
        assert plan.achieved_bias <= 1e-8
        assert plan.auc_a == fld_auc(CASE_A[0])
        assert bias(auc_with_noise(CASE_A[1], plan.lam), fld_auc(CASE_A[0])) <= 1e-8

    def test_solve_lambda_order(self):
        plan = solve_lambda(CASE_A[1], CASE_A[0])
        assert plan.advantaged == 0

    def test_ledger_random(self):
        r = np.random.default_rng(8)
        for _ in range(25):
            chk = check_noise(*noise_instance(r))
            assert chk.bias_ok and chk.aucs_ok


class TestTargetBias:
    def test_upper_endpoint(self):
        hi = achievable_bias_range(*CASE_A)[1]
        assert target_bias_lambda(*CASE_A, hi).lam == 1.0

    def test_zero_matches_solver(self):
        plan = target_bias_lambda(*CASE_A, 0.0)
        assert plan.lam == pytest.approx(noise_plan(*CASE_A).lam)

    def test_midpoint(self):
        lo, hi = achievable_bias_range(*CASE_B)
        v = 0.5 * (lo + hi)
        plan = target_bias_lambda(*CASE_B, v)
        assert abs(plan.achieved_bias - v) <= 1e-8
        assert bias(auc_with_noise(CASE_B[1], plan.lam), fld_auc(CASE_B[0])) == pytest.approx(v, abs=1e-8)

    def test_out_of_range(self):
        lo, _ = achievable_bias_range(*CASE_B)
        with pytest.raises(RangeError):
            target_bias_lambda(*CASE_B, lo / 2)

    def test_pareto(self):
        r = np.random.default_rng(4)
        checked = 0
        while checked < 10:
            a, b = noise_instance(r)
            out = check_pareto(a, b, r.uniform(), r.uniform())
            if out is None:
                continue
            two, one = out
            assert one[0] >= two[0] - 1e-9 and one[1] >= two[1] - 1e-9
            checked += 1


class TestRemarkScaling:
    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.9, 1.0])
    def test_beta_shrink(self, lam):
        st2 = pair([0.4, 0.8], (1.0, 1.6))
        shrunk = beta_of(noisy_stats(st2, lam)) ** 2
        assert shrunk == pytest.approx(beta_of(st2) ** 2 * remark_scaling(lam, 1.6))

    def test_zero(self):
        assert remark_scaling(0.0, 2.0) == 0.0
