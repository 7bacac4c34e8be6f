import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from fairauc.auc import (
    Binormal1D,
    bias,
    binormal_auc,
    bootstrap_auc_ci,
    disadvantaged,
    empirical_auc,
    fld_auc,
    fld_direction,
    pair_auc,
    pair_auc_many,
    unconditional_variance,
)
from fairauc.moments import ClassStats

PHI1 = float(mpmath.ncdf(1))


def pairwise_auc(scores, labels):
    """Mann-Whitney statistic by enumerating every positive/negative pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def stats2(dmu, s0, s1=None):
    s1 = s0 if s1 is None else s1
    return ClassStats(np.zeros(len(dmu)), dmu, s0, s1)


class TestBinormal:
    def test_equal_means(self):
        assert binormal_auc(Binormal1D(1.0, 1.0, 2.0, 3.0)) == 0.5

    def test_unit_separation(self):
        assert binormal_auc(Binormal1D(0.0, math.sqrt(5.0), 2.0, 3.0)) == pytest.approx(PHI1, abs=1e-14)

    def test_wide_variance_monte_carlo(self):
        p = Binormal1D(0.0, 10.0, 10.0, 1.0)
        expected = float(mpmath.ncdf(10 / mpmath.sqrt(11)))
        assert binormal_auc(p) == pytest.approx(expected, abs=1e-12)
        r = np.random.default_rng(7)
        n = 1_000_000
        x0 = r.normal(p.mu0, math.sqrt(p.var0), n)
        x1 = r.normal(p.mu1, math.sqrt(p.var1), n)
        # P(X1 > X0) estimated from independent pairs
        assert np.mean(x1 > x0) == pytest.approx(binormal_auc(p), abs=0.002)

    def test_rejects_nonpositive_variance(self):
        with pytest.raises(ValueError):
            Binormal1D(0.0, 1.0, 0.0, 1.0)


class TestEmpirical:
    def test_enumerated_pairs(self):
        s, y = [0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]
        assert pairwise_auc(s, y) == 0.75
        assert empirical_auc(s, y) == 0.75

    def test_separated(self):
        assert empirical_auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0

    def test_all_tied(self):
        assert empirical_auc([2.0] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            empirical_auc([1, 2], [1, 1])

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 1)), min_size=2, max_size=25))
    def test_matches_pair_enumeration(self, rows):
        s = [float(a) for a, _ in rows]
        y = [b for _, b in rows]
        if len(set(y)) < 2:
            return
        assert empirical_auc(s, y) == pytest.approx(pairwise_auc(s, y), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_monotone_transform_invariant(self, seed):
        r = np.random.default_rng(seed)
        s = r.normal(size=50)
        y = np.tile([0, 1], 25)
        assert empirical_auc(expit(s), y) == empirical_auc(s, y)
        assert empirical_auc(3 * s + 1, y) == empirical_auc(s, y)


class TestBias:
    @pytest.mark.parametrize("a,b,expected", [(0.8, 0.6, 0.25), (0.7, 0.7, 0.0), (1.0, 0.5, 0.5)])
    def test_values(self, a, b, expected):
        assert bias(a, b) == pytest.approx(expected)

    def test_disadvantaged(self):
        assert disadvantaged(0.61, 0.51) == 1
        assert disadvantaged(0.5, 0.6) == 0
        assert disadvantaged(0.6, 0.6) == 0

    @settings(max_examples=100)
    @given(st.floats(0.01, 1), st.floats(0.01, 1))
    def test_symmetric_and_bounded(self, a, b):
        assert bias(a, b) == bias(b, a)
        assert 0 <= bias(a, b) < 1


class TestFisher:
    def test_identity_covariances(self):
        w = fld_direction(ClassStats([0, 0], [2, 0], np.eye(2), np.eye(2)))
        np.testing.assert_allclose(w, [1, 0])

    def test_explicit_inverse(self):
        s = np.array([[2.0, 1.0], [1.0, 2.0]]) / 2
        w = fld_direction(ClassStats([0, 0], [1, 1], s, s))
        np.testing.assert_allclose(w, [1 / 3, 1 / 3], atol=1e-15)

    def test_one_dim_consistency(self):
        st1 = ClassStats([1.0], [2.5], [[0.7]], [[1.3]])
        w = fld_direction(st1)
        assert w[0] == pytest.approx(1.5 / 2.0)
        assert fld_auc(st1) == pytest.approx(binormal_auc(Binormal1D(1.0, 2.5, 0.7, 1.3)))

    def test_zero_gap(self):
        assert fld_auc(ClassStats([0, 0], [0, 0], np.eye(2), np.eye(2))) == 0.5

    def test_unit_quad_form(self):
        assert fld_auc(ClassStats([0, 0], [1, 1], np.eye(2), np.eye(2))) == pytest.approx(PHI1)

    def test_uninformative_uncorrelated_coordinate(self):
        a = ClassStats([0.0], [1.2], [[0.8]], [[1.1]])
        b = ClassStats([0.0, 5.0], [1.2, 5.0], np.diag([0.8, 3.0]), np.diag([1.1, 2.0]))
        assert fld_auc(b) == pytest.approx(fld_auc(a), abs=1e-15)


class TestPair:
    def test_independent_unit(self):
        st2 = stats2([1.0, 1.0], np.eye(2) / 2)
        assert pair_auc(st2) == pytest.approx(float(mpmath.ncdf(mpmath.sqrt(2))), abs=1e-14)

    def test_copy_gives_no_gain(self):
        s = np.full((2, 2), 0.6)
        st2 = ClassStats([0, 0], [0.9, 0.9], s, s)
        assert pair_auc(st2) == pytest.approx(float(mpmath.ncdf(0.9 / mpmath.sqrt(1.2))), abs=1e-9)

    def test_noise_candidate(self):
        st2 = stats2([0.7, 0.0], np.diag([0.5, 2.0]))
        assert pair_auc(st2) == pytest.approx(fld_auc(st2.subset([0])), abs=1e-15)

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            pair_auc(ClassStats([0], [1], [[1]], [[1]]))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_closed_form_matches_general(self, seed):
        r = np.random.default_rng(seed)
        a, b = r.normal(size=(2, 2)), r.normal(size=(2, 2))
        st2 = ClassStats(np.zeros(2), r.normal(size=2), a @ a.T + 0.1 * np.eye(2),
                         b @ b.T + 0.1 * np.eye(2))
        dmu, sig = st2.delta_mu, st2.sigma_sum
        q = dmu @ np.linalg.solve(sig, dmu)
        assert pair_auc(st2) == pytest.approx(float(mpmath.ncdf(mpmath.sqrt(q))), abs=1e-12)
        many = pair_auc_many(dmu[None], sig[None])
        assert many[0] == pytest.approx(pair_auc(st2), abs=1e-15)


class TestUnconditionalVariance:
    @pytest.mark.parametrize("v0,v1,expected", [
        (10, 1, 18.80), (4, 2.5, 18.80), (2, 3, 18.80),
        (2, 4, 19.60), (12, 3, 20.80), (4, 8, 23.20),
    ])
    def test_table_rows(self, v0, v1, expected):
        got = unconditional_variance(0.8, Binormal1D(0.0, 10.0, v0, v1))
        assert f"{got:.2f}" == f"{expected:.2f}"

    def test_no_gap(self):
        assert unconditional_variance(0.3, Binormal1D(1.0, 1.0, 2.5, 2.5)) == pytest.approx(2.5)

    def test_monte_carlo(self):
        r = np.random.default_rng(3)
        n = 400_000
        y = r.random(n) < 0.3
        x = np.where(y, r.normal(4, math.sqrt(2), n), r.normal(1, 1, n))
        got = unconditional_variance(0.3, Binormal1D(1, 4, 1, 2))
        assert np.var(x) == pytest.approx(got, rel=0.01)

    @pytest.mark.parametrize("pi", [0.0, 1.0, -0.2])
    def test_domain(self, pi):
        with pytest.raises(ValueError):
            unconditional_variance(pi, Binormal1D(0, 1, 1, 1))


class TestBootstrap:
    def test_covers_estimate(self):
        r = np.random.default_rng(0)
        y = np.r_[np.zeros(300), np.ones(300)].astype(int)
        s = r.normal(size=600) + y
        lo, hi = bootstrap_auc_ci(s, y, n_resamples=300, seed=4)
        assert lo < empirical_auc(s, y) < hi
        assert (lo, hi) == bootstrap_auc_ci(s, y, n_resamples=300, seed=4)
