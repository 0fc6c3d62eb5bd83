import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cpreturns.dist import (CountDistribution, DistParams, DomainError, entry_P, entry_pgf, entry_pmf,
                            entry_return_integral_check, factorial_moment, limit_distribution,
                            moments, pmf, pmf_array, return_P_hat, return_pgf, return_pmf, sample,
                            support_size, tail_bound, total_variation)


def P_exact(r, t, p):
    """Rational evaluation of the entry polynomial, an oracle independent of the float code."""
    t, p = Fraction(t), Fraction(p)
    if r == 0:
        return Fraction(1)
    return sum(p ** (r - j) * (1 - p) ** j * t ** j / math.factorial(j) * math.comb(r - 1, j - 1)
               for j in range(1, r + 1))


def P_hat_exact(r, t, p):
    t, p = Fraction(t), Fraction(p)
    return sum(p ** (r - j) * (1 - p) ** (j + 1) * t ** j / math.factorial(j) * math.comb(r, j)
               for j in range(r + 1))


ts = st.floats(0.0, 20.0)
ps = st.floats(0.0, 0.95)


class TestParams:
    @pytest.mark.parametrize("t,p", [(-0.1, 0.3), (1.0, 1.0), (1.0, -0.2), (math.nan, 0.1)])
    def test_rejects_out_of_range(self, t, p):
        with pytest.raises(ValueError):
            DistParams(t, p)

    def test_derived_moments(self):
        d = DistParams(2.0, 0.5)
        assert d.mean == 4.0
        assert d.variance == pytest.approx(2.0 * 1.5 / 0.25)


class TestEntryPolynomial:
    @pytest.mark.parametrize("t,p", [(0.0, 0.2), (1.7, 0.0), (3.0, 0.9)])
    def test_zero_order_is_one(self, t, p):
        assert entry_P(0, DistParams(t, p)) == 1.0

    @pytest.mark.parametrize("r", [1, 2, 7, 40])
    def test_vanishes_at_t_zero(self, r):
        assert entry_P(r, DistParams(0.0, 0.4)) == 0.0

    def test_first_order(self):
        assert entry_P(1, DistParams(2.5, 0.3)) == pytest.approx(0.7 * 2.5, rel=1e-15)

    @pytest.mark.parametrize("r", [0, 1, 3, 10, 25])
    def test_poisson_terms_at_p_zero(self, r):
        assert entry_P(r, DistParams(1.3, 0.0)) == pytest.approx(1.3 ** r / math.factorial(r), rel=1e-14)

    @pytest.mark.parametrize("r,t,p", [(5, 1.5, 0.3), (12, 4.0, 0.7), (30, 2.0, 0.95), (64, 10.0, 0.5)])
    def test_matches_rational_oracle(self, r, t, p):
        assert entry_P(r, DistParams(t, p)) == pytest.approx(float(P_exact(r, t, p)), rel=1e-12)

    @pytest.mark.parametrize("r,t,p", [(80, 12.0, 0.6), (150, 40.0, 0.5)])
    def test_log_space_branch_matches_rational_oracle(self, r, t, p):
        assert entry_P(r, DistParams(t, p)) == pytest.approx(float(P_exact(r, t, p)), rel=1e-10)


class TestEntryPmf:
    def test_poisson_one(self):
        assert entry_pmf(1, DistParams(1.0, 0.0)) == pytest.approx(0.3678794411714423, rel=1e-15)

    def test_two_term_hand_expansion(self):
        # j=1: 0.5 * 0.5 * 2 = 0.5; j=2: 0.25 * 2 = 0.5
        assert entry_pmf(2, DistParams(2.0, 0.5)) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_zero_count(self):
        assert entry_pmf(0, DistParams(3.0, 0.7)) == pytest.approx(math.exp(-3.0), rel=1e-15)

    @given(ts, ps)
    @settings(max_examples=60, deadline=None)
    def test_normalisation(self, t, p):
        prm = DistParams(t, p)
        for kind in ("entry", "return"):
            R = support_size(prm, 1e-12, kind)
            total = math.fsum(pmf_array(R, prm, kind))
            assert abs(total - 1.0) < 1e-10
            assert tail_bound(R, prm, kind) < 1e-10

    @given(st.floats(0.0, 25.0))
    @settings(max_examples=40, deadline=None)
    def test_p_zero_is_poisson(self, t):
        prm = DistParams(t, 0.0)
        ref = stats.poisson.pmf(np.arange(40), t)
        np.testing.assert_allclose(pmf_array(39, prm, "entry"), ref, rtol=1e-12, atol=1e-300)
        np.testing.assert_allclose(pmf_array(39, prm, "return"), ref, rtol=1e-12, atol=1e-300)

    @pytest.mark.parametrize("kind", ["entry", "return"])
    @pytest.mark.parametrize("t,p", [(0.5, 0.7), (5.0, 0.3), (60.0, 0.2), (1000.0, 0.9)])
    def test_array_matches_scalar(self, kind, t, p):
        prm = DistParams(t, p)
        R = min(support_size(prm, 1e-12, kind), 400)
        arr = pmf_array(R, prm, kind)
        idx = np.linspace(0, R, 12).astype(int)
        scal = np.array([pmf(int(r), prm, kind) for r in idx])
        np.testing.assert_allclose(arr[idx], scal, rtol=1e-9, atol=1e-300)


class TestReturnPolynomial:
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.9])
    def test_zero_time_is_geometric(self, p):
        prm = DistParams(0.0, p)
        assert return_P_hat(0, prm) == pytest.approx(1 - p)
        for r in range(1, 6):
            assert return_P_hat(r, prm) == pytest.approx(p ** r * (1 - p), rel=1e-14)

    @pytest.mark.parametrize("r", [0, 2, 9])
    def test_poisson_terms_at_p_zero(self, r):
        assert return_P_hat(r, DistParams(2.2, 0.0)) == pytest.approx(2.2 ** r / math.factorial(r), rel=1e-14)

    @pytest.mark.parametrize("r,t,p", [(4, 1.0, 0.3), (20, 3.0, 0.8), (50, 6.0, 0.45)])
    def test_matches_rational_oracle(self, r, t, p):
        assert return_P_hat(r, DistParams(t, p)) == pytest.approx(float(P_hat_exact(r, t, p)), rel=1e-12)

    def test_return_is_entry_plus_independent_geometric(self):
        prm = DistParams(1.4, 0.35)
        e = pmf_array(60, prm, "entry")
        g = (1 - 0.35) * 0.35 ** np.arange(61)
        np.testing.assert_allclose(np.convolve(e, g)[:61], pmf_array(60, prm, "return"), rtol=1e-12)


class TestGeneratingFunctions:
    @pytest.mark.parametrize("t,p", [(1.0, 0.3), (4.0, 0.0), (0.2, 0.9)])
    def test_normalised_at_one(self, t, p):
        assert entry_pgf(1.0, DistParams(t, p)) == pytest.approx(1.0)
        assert return_pgf(1.0, DistParams(t, p)) == pytest.approx(1.0)

    def test_poisson_pgf(self):
        assert entry_pgf(0.4, DistParams(2.0, 0.0)) == pytest.approx(math.exp(2.0 * (0.4 - 1)), rel=1e-15)

    def test_return_pgf_at_zero(self):
        prm = DistParams(1.5, 0.4)
        assert return_pgf(0.0, prm) == pytest.approx(0.6 * math.exp(-1.5), rel=1e-15)
        assert return_pgf(0.0, prm) == pytest.approx(return_pmf(0, prm), rel=1e-14)

    def test_domain_error_outside_radius(self):
        with pytest.raises(DomainError):
            entry_pgf(2.5, DistParams(1.0, 0.5))
        with pytest.raises(DomainError):
            return_pgf(-2.0, DistParams(1.0, 0.5))

    @pytest.mark.parametrize("kind", ["entry", "return"])
    @pytest.mark.parametrize("z", [0.0, 0.25, 0.5, -0.5])
    @pytest.mark.parametrize("t,p", [(1.0, 0.3), (3.0, 0.7), (0.4, 0.05)])
    def test_series_matches_closed_form(self, kind, z, t, p):
        prm = DistParams(t, p)
        R = support_size(prm, 1e-16, kind)
        probs = pmf_array(R, prm, kind)
        series = math.fsum(probs * z ** np.arange(R + 1))
        closed = (entry_pgf if kind == "entry" else return_pgf)(z, prm)
        assert abs(series - closed) < 1e-9


class TestMoments:
    def test_zeroth_factorial_moment(self):
        assert factorial_moment(0, DistParams(2.0, 0.4), "entry") == 1.0
        assert factorial_moment(0, DistParams(2.0, 0.4), "return") == 1.0

    def test_first_factorial_moment_is_mean(self):
        assert factorial_moment(1, DistParams(2.0, 0.4), "entry") == pytest.approx(2.0 / 0.6)
        assert factorial_moment(1, DistParams(2.0, 0.4), "return") == pytest.approx(2.4 / 0.6)

    def test_poisson_moments(self):
        assert moments(DistParams(1.0, 0.0), "entry") == pytest.approx((1.0, 1.0))

    @pytest.mark.parametrize("t,p", [(1.0, 0.3), (5.0, 0.8), (0.3, 0.95), (20.0, 0.5)])
    def test_closed_forms_match_truncated_sums(self, t, p):
        prm = DistParams(t, p)
        for kind, mean, var in (("entry", t / (1 - p), t * (1 + p) / (1 - p) ** 2),
                                ("return", (t + p) / (1 - p), (t + t * p + p) / (1 - p) ** 2)):
            assert moments(prm, kind) == pytest.approx((mean, var), rel=1e-14)
            R = support_size(prm, 1e-16, kind) + 50
            r = np.arange(R + 1)
            probs = pmf_array(R, prm, kind)
            m1 = math.fsum(r * probs)
            m2 = math.fsum(r * r * probs)
            assert abs(m1 - mean) < 1e-8
            assert abs(m2 - m1 ** 2 - var) < 1e-8

    @given(st.integers(0, 4), st.floats(0.0, 5.0), st.floats(0.0, 0.8), st.sampled_from(["entry", "return"]))
    @settings(max_examples=80, deadline=None)
    def test_factorial_moments_match_pmf(self, k, t, p, kind):
        prm = DistParams(t, p)
        R = support_size(prm, 1e-16, kind) + 60
        r = np.arange(R + 1, dtype=float)
        falling = np.ones_like(r)
        for i in range(k):
            falling *= r - i
        emp = math.fsum(falling * pmf_array(R, prm, kind)) / math.factorial(k)
        assert emp == pytest.approx(factorial_moment(k, prm, kind), rel=1e-8, abs=1e-8)


def _chi2_pvalue(samples, probs):
    """Pearson chi-square over ``0..len(probs)-1`` with a final tail bin."""
    K = len(probs)
    counts = np.bincount(np.minimum(samples, K), minlength=K + 1)
    expected = np.append(probs, max(1.0 - probs.sum(), 0.0)) * len(samples)
    keep = expected >= 5
    obs = np.append(counts[keep], counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    exp = exp * obs.sum() / exp.sum()
    return stats.chisquare(obs, exp).pvalue


class TestSampler:
    def test_zero_time_always_zero(self):
        rng = np.random.default_rng(0)
        assert (sample(DistParams(0.0, 0.6), rng, size=1000) == 0).all()

    def test_scalar_draw(self):
        x = sample(DistParams(1.0, 0.3), np.random.default_rng(1))
        assert isinstance(x, int) and x >= 0

    def test_deterministic_given_seed(self):
        a = sample(DistParams(2.0, 0.5), np.random.default_rng(7), size=100)
        b = sample(DistParams(2.0, 0.5), np.random.default_rng(7), size=100)
        assert (a == b).all()

    def test_mean_within_three_sigma(self):
        prm = DistParams(2.0, 0.5)
        n = 10 ** 6
        x = sample(prm, np.random.default_rng(11), size=n)
        assert abs(x.mean() - 4.0) < 3 * math.sqrt(prm.variance / n)

    @pytest.mark.parametrize("method", ["compound", "inverse_cdf"])
    @pytest.mark.parametrize("kind", ["entry", "return"])
    @pytest.mark.parametrize("t,p", [(1.0, 0.3), (2.0, 0.5), (0.5, 0.7)])
    def test_chi_square(self, method, kind, t, p):
        prm = DistParams(t, p)
        x = sample(prm, np.random.default_rng(2024), kind, size=10 ** 6, method=method)
        assert _chi2_pvalue(x, pmf_array(10, prm, kind)) > 1e-3

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            sample(DistParams(1.0, 0.3), np.random.default_rng(0), method="rejection")


class TestIntegralRelation:
    def test_poisson_identity(self):
        assert entry_return_integral_check(0.0, 1, np.linspace(0, 5, 11)) < 1e-10

    @pytest.mark.parametrize("p,k", [(0.3, 1), (0.5, 3)])
    def test_spec_points(self, p, k):
        assert entry_return_integral_check(p, k, np.linspace(0, 5, 11)) < 1e-6

    def test_first_order_closed_form(self):
        # both sides equal (1-p) u e^-u with u = (1-p) s; derivative (1-p)^2 e^-u (1-u)
        p, s = 0.3, 1.7
        u = (1 - p) * s
        lhs = entry_pmf(1, DistParams(u, p))
        assert lhs == pytest.approx((1 - p) * u * math.exp(-u), rel=1e-14)

    def test_rejects_k_zero(self):
        with pytest.raises(ValueError):
            entry_return_integral_check(0.3, 0, [1.0])


class TestCountDistribution:
    def test_json_round_trip(self):
        d = limit_distribution(DistParams(1.0, 0.3), 8)
        back = CountDistribution.from_json(d.to_json())
        np.testing.assert_array_equal(back.probs, d.probs)
        assert back.tail_mass == d.tail_mass
        assert back.provenance == "limit_law" and back.params == d.params

    def test_schema_keys(self):
        d = limit_distribution(DistParams(1.0, 0.3), 4, "return").to_dict()
        assert set(d) == {"r_max", "probs", "tail_mass", "provenance", "sample_count", "params"}
        assert d["r_max"] == 4 and len(d["probs"]) == 5

    def test_validate_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            CountDistribution(np.array([0.5, 0.3]), 0.0, "exact", 0, {}).validate()

    def test_rejects_negative_tail(self):
        with pytest.raises(ValueError):
            CountDistribution(np.array([1.0]), -0.1, "exact", 0, {})

    def test_total_variation_folds_tails(self):
        a = CountDistribution(np.array([0.5, 0.5]), 0.0, "exact", 0, {})
        b = CountDistribution(np.array([0.5, 0.25, 0.25]), 0.0, "exact", 0, {})
        assert total_variation(a, b, 0) == 0.0
        assert total_variation(a, b, 1) == pytest.approx(0.25)
