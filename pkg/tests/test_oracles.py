"""Tests for the brute-force and exact-combinatorics oracles."""

import math

import numpy as np
import pytest

from sampthresh.calibration import calibrate, delta_bound_exact
from sampthresh.mechanism import Dataset, run_mechanism
from sampthresh.oracles import (
    OutputDistribution,
    binomial_logpmf,
    binomial_pmf,
    binomial_tail_ge,
    canonical_key,
    count_ratio,
    dp_verify,
    freq_error_bound,
    hockey_stick,
    hockey_stick_symmetric,
    omit_probability_bound,
    output_distribution,
    output_distribution_fixed,
    phi_solve,
    s_count_at_least,
    s_count_enumerate,
    s_count_exact,
)


class TestOutputDistribution:
    def test_single_item(self):
        dist = output_distribution([7], 0.5, 1)
        assert dist.probs == {(): 0.5, ((7, 1),): 0.5}

    def test_two_identical_items(self):
        dist = output_distribution([3, 3], 0.5, 2)
        assert dist.get(()) == pytest.approx(0.75)
        assert dist.get(((3, 2),)) == pytest.approx(0.25)

    def test_masses_sum_to_one(self):
        for items, p_s, tau in [
            ([0, 0, 1, 2, 2, 2], 0.3, 2),
            ([0] * 10, 0.1, 3),
            (list(range(8)), 0.7, 1),
            ([], 0.5, 1),
        ]:
            dist = output_distribution(items, p_s, tau)
            assert dist.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_per_bucket_marginal_matches_binomial(self):
        # bucket with k copies: P(released count = v) = Binomial(k, p_s) pmf
        # for v >= tau, with everything below tau collapsing to absence
        items = [0] * 6 + [1] * 4
        p_s, tau = 0.3, 2
        dist = output_distribution(items, p_s, tau)
        for bucket, k in [(0, 6), (1, 4)]:
            for v in range(tau, k + 1):
                marginal = sum(
                    prob
                    for key, prob in dist.probs.items()
                    if dict(key).get(bucket, 0) == v
                )
                assert marginal == pytest.approx(binomial_pmf(k, p_s, v), abs=1e-12)
            absent = sum(
                prob for key, prob in dist.probs.items() if bucket not in dict(key)
            )
            below = sum(binomial_pmf(k, p_s, v) for v in range(tau))
            assert absent == pytest.approx(below, abs=1e-12)

    def test_rejects_large_n(self):
        with pytest.raises(ValueError, match="n <= 20"):
            output_distribution([0] * 21, 0.5, 1)

    def test_accepts_dataset_objects(self):
        ds = Dataset(items=np.array([0, 0, 1]), B=2)
        dist = output_distribution(ds, 0.5, 1)
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-12)


class TestHockeyStick:
    def test_identical_distributions(self):
        P = output_distribution([0, 0, 1], 0.4, 1)
        for eps in [0.0, 0.5, 2.0]:
            assert hockey_stick(P, P, eps) == pytest.approx(0.0, abs=1e-15)

    def test_epsilon_zero_is_total_variation(self):
        P = OutputDistribution({(): 0.6, ((1, 1),): 0.4})
        Q = OutputDistribution({(): 0.1, ((1, 1),): 0.9})
        assert hockey_stick(P, Q, 0.0) == pytest.approx(0.5)

    def test_disjoint_supports(self):
        P = OutputDistribution({((1, 1),): 1.0})
        Q = OutputDistribution({((2, 1),): 1.0})
        for eps in [0.0, 1.0, 10.0]:
            assert hockey_stick(P, Q, eps) == pytest.approx(1.0)

    def test_symmetric_takes_max(self):
        P = OutputDistribution({(): 0.9, ((1, 1),): 0.1})
        Q = OutputDistribution({(): 0.5, ((1, 1),): 0.5})
        eps = 0.3
        expected = max(hockey_stick(P, Q, eps), hockey_stick(Q, P, eps))
        assert hockey_stick_symmetric(P, Q, eps) == expected


class TestDpVerify:
    def test_identical_inputs_give_zero(self):
        D = [0, 0, 1, 1]
        rows = dp_verify(D, list(D), 0.3, 2, [0.5, 1.0])
        assert all(row.observed_delta == pytest.approx(0.0, abs=1e-15) for row in rows)

    def test_spec_example_within_bound(self):
        D = [0] * 12
        D_prime = [0] * 11 + [1]
        rows = dp_verify(D, D_prime, 0.3, 2, [1.0])
        (row,) = rows
        assert row.bound_delta == pytest.approx(delta_bound_exact(1.0, 0.3, 2), rel=1e-12)
        assert row.observed_delta <= row.bound_delta

    def test_bound_column_empty_when_condition_fails(self):
        # p_s = 0.5 > 1 - e^-0.25
        rows = dp_verify([0] * 6, [0] * 5 + [1], 0.5, 2, [0.25])
        assert rows[0].bound_delta is None
        assert rows[0].within_bound is None

    def test_rejects_non_neighbors(self):
        with pytest.raises(ValueError, match="neighbor"):
            dp_verify([0, 0, 0], [1, 1, 0], 0.3, 1, [1.0])
        with pytest.raises(ValueError, match="neighbor"):
            dp_verify([0, 0], [0, 0, 0], 0.3, 1, [1.0])

    def test_grid_of_configurations_within_bound(self):
        # broad sweep on tiny populations; the exact bound must dominate the
        # observed hockey-stick divergence whenever its condition holds
        epsilon_grid = [0.5, 1.0, 2.0]
        checked = 0
        for n in [6, 8, 10]:
            for split in [0, 1, n // 2]:
                D = [0] * (n - split) + [1] * split
                D_prime = list(D)
                D_prime[0] = 2 if split else 1
                for p_s in [0.1, 0.3]:
                    for tau in [1, 2, 3]:
                        rows = dp_verify(D, D_prime, p_s, tau, epsilon_grid)
                        for row in rows:
                            if row.bound_delta is not None:
                                assert row.observed_delta <= row.bound_delta + 1e-12
                                checked += 1
        assert checked >= 50

    def test_fixed_size_sampling_counterexample(self):
        # D' = n identical items, D = n-1 identical + 1 unique: with a known
        # sample size m the output size leaks, forcing delta >= m/n
        n, m, tau = 8, 3, 2
        D = [0] * (n - 1) + [1]
        D_prime = [0] * n
        P = output_distribution_fixed(D, m, tau)
        Q = output_distribution_fixed(D_prime, m, tau)
        for eps in [0.5, 1.0, 4.0]:
            assert hockey_stick_symmetric(P, Q, eps) >= m / n - 1e-12

    def test_fixed_size_masses_sum_to_one(self):
        dist = output_distribution_fixed([0, 0, 1, 1, 2], 3, 1)
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-12)


class TestBinomial:
    def test_simple_tail(self):
        assert binomial_tail_ge(2, 0.5, 1) == pytest.approx(0.75)

    def test_tail_at_zero_is_one(self):
        assert binomial_tail_ge(10, 0.3, 0) == 1.0

    def test_pmf_sums_to_one(self):
        for k, p in [(5, 0.2), (30, 0.7), (600, 0.01)]:
            total = sum(binomial_pmf(k, p, v) for v in range(k + 1))
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_logpmf_consistent_with_pmf(self):
        for k, p, v in [(10, 0.3, 4), (30, 0.1, 21), (2000, 0.01, 50)]:
            assert binomial_pmf(k, p, v) == pytest.approx(
                math.exp(binomial_logpmf(k, p, v)), rel=1e-10
            )

    def test_degenerate_p(self):
        assert binomial_pmf(5, 0.0, 0) == 1.0
        assert binomial_pmf(5, 0.0, 1) == 0.0
        assert binomial_pmf(5, 1.0, 5) == 1.0

    def test_chernoff_dominates_strict_tail(self):
        # theorem cross-check at the calibrated point (eps=1, alpha=1/6,
        # tau=20): the strict tail Pr[B(ceil(tau/q), p_s) > tau] is below
        # exp(-(tau/q) D(q||p_s)); mpmath oracle for the tail: 1.649369e-14
        params = calibrate(1.0, 1e-8, 1 / 6)
        k = math.ceil(params.tau / params.q)
        assert k == 30
        tail = binomial_tail_ge(k, params.p_s, params.tau + 1)
        assert tail == pytest.approx(1.649369062e-14, rel=1e-6)
        assert tail <= delta_bound_exact(1.0, params.p_s, params.tau)


class TestCountRatio:
    def test_worst_case_v_zero(self):
        assert count_ratio(5, 0, 0.3) == pytest.approx(0.7)

    def test_spec_point(self):
        assert count_ratio(10, 5, 0.1) == pytest.approx(1.8)

    def test_equals_pmf_ratio_exactly(self):
        for p_s in [0.1, 0.3, 0.5]:
            for k in range(1, 31):
                for v in range(k):
                    ratio = binomial_pmf(k, p_s, v) / binomial_pmf(k - 1, p_s, v)
                    assert ratio == pytest.approx(count_ratio(k, v, p_s), rel=1e-12)

    def test_ratio_within_exp_eps_iff_v_below_kq(self):
        eps = 1.0
        e_eps = math.exp(eps)
        for p_s in [0.1, 0.3]:
            q = 1.0 - math.exp(-eps) * (1.0 - p_s)
            for k in range(1, 25):
                for v in range(k):
                    if abs(v - k * q) < 1e-9:
                        continue
                    ratio = count_ratio(k, v, p_s)
                    assert (ratio <= e_eps) == (v <= k * q)

    def test_guards(self):
        with pytest.raises(ValueError):
            count_ratio(5, 5, 0.1)


class TestSCount:
    def test_closed_form_k_zero(self):
        for n in range(1, 8):
            for s in range(n + 1):
                assert s_count_exact(0, n, s, 0) == math.comb(n, s)

    def test_closed_form_vs_enumeration(self):
        for n in range(1, 11):
            for k in range(n + 1):
                for s in range(n + 1):
                    for tau in range(s + 2):
                        assert s_count_at_least(k, n, s, tau) == s_count_enumerate(
                            k, n, s, tau
                        )

    def test_recurrence(self):
        # S_k(n, m, tau) = S_k(n-1, m, tau) + S_k(n-1, m-1, tau) whenever the
        # removed item is not one of the k target copies (k <= n - 1)
        for n in range(2, 13):
            for k in range(n):
                for m in range(1, n + 1):
                    for tau in range(m + 1):
                        assert s_count_at_least(k, n, m, tau) == s_count_at_least(
                            k, n - 1, m, tau
                        ) + s_count_at_least(k, n - 1, m - 1, tau)

    def test_ratio_bound(self):
        for n in range(2, 13):
            for m in range(1, n + 1):
                for tau in range(1, m + 1):
                    for k in range(tau, n):
                        denom = s_count_at_least(k, n, m, tau)
                        if denom == 0:
                            continue
                        ratio = s_count_at_least(k + 1, n, m, tau) / denom
                        assert ratio <= (k + 1) / (k - tau + 1) + 1e-12


class TestOmitProbabilityBound:
    def test_paper_numeric_example(self):
        # w = 100, tau = 20 -> exp(-32)
        bound = omit_probability_bound(1000, 10**6, 10**5, 20)
        assert bound == pytest.approx(math.exp(-32), rel=1e-12)
        assert bound < 1e-13

    def test_direct_value(self):
        assert omit_probability_bound(400, 10**6, 10**5, 20) == pytest.approx(
            math.exp(-5), rel=1e-12
        )

    def test_approaches_one_near_tau(self):
        bound = omit_probability_bound(2001, 10**5, 10**3, 20)
        assert bound > 0.99

    def test_vacuous_rejected(self):
        with pytest.raises(ValueError, match="vacuous"):
            omit_probability_bound(100, 10**6, 10**5, 20)

    def test_monte_carlo_omit_rate_below_bound(self):
        # item at 1% of n = 2e4 with p_s = 0.25 -> w = 50, tau = 20
        n, freq, p_s, tau = 20000, 0.01, 0.25, 20
        W = int(n * freq)
        items = np.zeros(n, dtype=np.int64)
        items[:W] = 1
        ds = Dataset(items=items, B=2)
        params = PrivacyParams(epsilon=1.5, delta=1e-4, alpha=0.33, p_s=p_s, tau=tau)
        omitted = 0
        trials = 400
        for seed in range(trials):
            hist = run_mechanism(ds, params, seed)
            if 1 not in hist.counts:
                omitted += 1
        bound = omit_probability_bound(W, n, params.p_s * n, tau)
        # 99% confidence: omit rate should not exceed bound + 3 sigma
        sigma = math.sqrt(bound * (1 - bound) / trials) if bound < 1 else 0.0
        assert omitted / trials <= bound + 3 * sigma + 1e-9


class TestFrequencyErrorBound:
    def test_direct_value(self):
        assert freq_error_bound(0.999999, 3.0) == pytest.approx(2 / math.e, rel=1e-4)

    def test_vanishes_for_large_mu(self):
        assert freq_error_bound(0.5, 1e6) < 1e-300 or freq_error_bound(0.5, 1e6) == 0.0

    def test_phi_solve_paper_example(self):
        # gamma = 1/sqrt(10), ln(1/2beta) = 10, m = 0.1 n -> phi = 3e3/n
        n = 10**6
        beta_conf = math.exp(-10) / 2
        phi = phi_solve(1 / math.sqrt(10), beta_conf, 0.1 * n)
        assert phi == pytest.approx(3e3 / n, rel=1e-9)


class TestCanonicalKey:
    def test_sorted_pairs(self):
        assert canonical_key({2: 5, 1: 3}) == ((1, 3), (2, 5))
