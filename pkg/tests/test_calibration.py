"""Tests for the closed-form privacy calibration math.

Frozen expected values were computed independently with mpmath at 40 digits
before being asserted here.
"""

import math

import pytest
import scipy.special

from sampthresh.calibration import (
    CalibrationError,
    PrivacyParams,
    TrieHHLegacyParams,
    c_alpha,
    calibrate,
    delta_bound_exact,
    eps_of,
    kl_divergence,
    lambert_w,
    log_delta_bound_exact,
    q_of,
    triehh_delta,
    triehh_log_delta,
    triehh_sample_size,
    triehh_sample_size_original,
    triehh_tau,
)


class TestKLDivergence:
    def test_equal_args_is_zero(self):
        assert kl_divergence(0.3, 0.3) == 0.0

    def test_direct_value(self):
        # mpmath oracle: 0.14384103622589046
        assert kl_divergence(0.5, 0.25) == pytest.approx(0.14384103622589046, abs=1e-12)

    def test_degenerate_q_one(self):
        assert kl_divergence(1.0, 0.5) == pytest.approx(math.log(2), abs=1e-12)

    def test_degenerate_q_zero(self):
        assert kl_divergence(0.0, 0.5) == pytest.approx(math.log(2), abs=1e-12)

    def test_nonnegative_and_zero_iff_equal(self):
        grid = [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99]
        for q in grid:
            for p in grid:
                val = kl_divergence(q, p)
                if q == p:
                    assert val == 0.0
                else:
                    assert val > 0.0

    def test_pinsker_inequality(self):
        grid = [0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98]
        for q in grid:
            for p in grid:
                assert kl_divergence(q, p) >= 2.0 * (q - p) ** 2 - 1e-15

    def test_rejects_boundary_p(self):
        with pytest.raises(CalibrationError):
            kl_divergence(0.5, 0.0)
        with pytest.raises(CalibrationError):
            kl_divergence(0.5, 1.0)


class TestQOf:
    def test_epsilon_zero_limit(self):
        assert q_of(1e-12, 0.2) == pytest.approx(0.2, abs=1e-9)

    def test_direct_value(self):
        # mpmath oracle: 0.67087790874606911
        assert q_of(1.0, 0.1053534) == pytest.approx(0.67087790874606911, abs=1e-12)

    def test_ln2(self):
        assert q_of(math.log(2), 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_strictly_between_ps_and_one(self):
        for eps in [0.1, 0.5, 1.0, 3.0]:
            for p_s in [0.0, 0.05, 0.3, 0.9]:
                q = q_of(eps, p_s)
                assert p_s < q < 1.0


class TestDeltaBoundExact:
    def test_paper_point(self):
        # mpmath oracle: 1.5179636430650591e-12
        assert delta_bound_exact(1.0, 0.1053534, 20) == pytest.approx(
            1.5179636430650591e-12, rel=1e-9
        )

    def test_dominated_by_simplified_bound(self):
        p_s = 0.1053534
        assert delta_bound_exact(1.0, p_s, 20) <= math.exp(-20 * c_alpha(1 / 6))

    def test_monotone_decreasing_in_tau(self):
        vals = [delta_bound_exact(1.0, 0.1, tau) for tau in range(1, 40)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_vanishes_as_tau_grows(self):
        # log form is linear in tau, so huge tau cannot overflow
        assert log_delta_bound_exact(1.0, 0.1, 10**6) < -1000
        assert delta_bound_exact(1.0, 0.1, 2000) == 0.0  # underflows cleanly

    def test_monotone_nondecreasing_in_ps(self):
        eps = 1.0
        cap = 1.0 - math.exp(-eps)
        grid = [cap * f for f in (0.05, 0.2, 0.4, 0.6, 0.8, 0.999)]
        vals = [delta_bound_exact(eps, p, 5) for p in grid]
        assert all(a <= b + 1e-18 for a, b in zip(vals, vals[1:]))

    def test_rejects_ps_above_cap(self):
        with pytest.raises(CalibrationError, match="1 - exp"):
            delta_bound_exact(0.1, 0.5, 5)


class TestCAlpha:
    def test_paper_sixth(self):
        assert c_alpha(1 / 6) == pytest.approx(0.93461661208519786, abs=5e-13)

    def test_alpha_one_gives_no_bound(self):
        assert c_alpha(1.0) == pytest.approx(-0.5, abs=1e-12)

    def test_small_alpha(self):
        # ln(100) - 1/1.01; mpmath oracle 3.6150711760871013
        assert c_alpha(0.01) == pytest.approx(3.6150711760871013, abs=1e-12)

    def test_domain(self):
        with pytest.raises(CalibrationError):
            c_alpha(0.0)
        with pytest.raises(CalibrationError):
            c_alpha(1.5)


class TestCalibrate:
    def test_paper_fixture(self):
        params = calibrate(1.0, 1e-8, 1 / 6)
        assert params.p_s == pytest.approx(0.105353, abs=1e-6)
        assert params.tau == 20

    def test_sampling_rate_rule_exact(self):
        for eps in [0.1, 0.5, 1.0, 2.0]:
            params = calibrate(eps, 1e-8, 1 / 6)
            assert params.p_s == pytest.approx(
                (1 - math.exp(-eps)) / 6, abs=1e-12
            )

    def test_simplified_bound_met(self):
        params = calibrate(1.0, 1e-8, 1 / 6)
        simplified = math.exp(-params.tau * params.c_alpha)
        assert simplified == pytest.approx(7.62e-9, rel=0.01)
        assert simplified < 1e-8

    def test_exact_bound_meets_target(self):
        for eps in [0.2, 1.0, 3.0]:
            for delta in [1e-6, 1e-8, 1e-12]:
                params = calibrate(eps, delta, 1 / 6)
                assert delta_bound_exact(eps, params.p_s, params.tau) <= delta

    def test_roundtrip_identity(self):
        for eps in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0]:
            for alpha in [0.05, 1 / 6]:
                params = calibrate(eps, 1e-9, alpha)
                assert eps_of(params.p_s, alpha) == pytest.approx(eps, abs=1e-9)

    def test_rejects_vacuous_alpha(self):
        with pytest.raises(CalibrationError, match="vacuous"):
            calibrate(1.0, 1e-8, 0.9)


class TestEpsOf:
    def test_zero(self):
        assert eps_of(0.0, 1 / 6) == 0.0

    def test_inverse_of_calibrate_example(self):
        assert eps_of(0.1053534264714263, 1 / 6) == pytest.approx(1.0, abs=1e-9)

    def test_ln2(self):
        assert eps_of(0.1, 0.2) == pytest.approx(math.log(2), abs=1e-12)

    def test_domain(self):
        with pytest.raises(CalibrationError):
            eps_of(0.3, 0.2)


class TestPrivacyParams:
    def test_q_and_c_alpha_derived(self):
        params = calibrate(1.0, 1e-8, 1 / 6)
        assert params.q == pytest.approx(q_of(1.0, params.p_s), abs=1e-15)
        assert params.c_alpha == pytest.approx(c_alpha(1 / 6), abs=1e-15)

    def test_rejects_ps_violating_theorem_condition(self):
        with pytest.raises(CalibrationError):
            PrivacyParams(epsilon=0.1, delta=1e-8, alpha=1.0, p_s=0.5, tau=5)

    def test_rejects_bad_tau(self):
        with pytest.raises(CalibrationError):
            PrivacyParams(epsilon=1.0, delta=1e-8, alpha=1 / 6, p_s=0.1, tau=0)

    def test_rejects_bad_delta(self):
        with pytest.raises(CalibrationError):
            PrivacyParams(epsilon=1.0, delta=0.0, alpha=1 / 6, p_s=0.1, tau=5)


class TestLambertW:
    def test_zero(self):
        assert lambert_w(0.0) == 0.0

    def test_e_maps_to_one(self):
        assert lambert_w(math.e) == pytest.approx(1.0, abs=1e-12)

    def test_spec_point(self):
        w = lambert_w(8.1025)
        assert w == pytest.approx(1.6136647941536199, abs=1e-10)
        assert abs(w * math.exp(w) - 8.1025) < 1e-10 * 8.1025

    def test_residual_over_grid(self):
        xs = [-1 / math.e + 1e-6, -0.3, -0.05, 1e-6, 0.5, 1.0, 10.0, 123.4, 1e3]
        for x in xs:
            w = lambert_w(x)
            assert abs(w * math.exp(w) - x) < 1e-10 * max(1.0, abs(x))

    def test_matches_scipy(self):
        xs = [-0.35, -0.1, 0.0, 0.3, 2.0, 50.0, 977.5]
        for x in xs:
            assert lambert_w(x) == pytest.approx(
                float(scipy.special.lambertw(x).real), abs=1e-9
            )

    def test_domain(self):
        with pytest.raises(CalibrationError):
            lambert_w(-1.0)


class TestTrieHHCalibration:
    def test_tau_for_inverse_square_delta(self):
        # delta = 1/n^2 at n = 1e5
        assert triehh_tau(1e-10) == 14
        assert triehh_delta(14) <= 1e-10
        assert triehh_delta(13) > 1e-10

    def test_tau_footnote_point(self):
        assert triehh_tau(1e-157) <= 100

    def test_tau_monotone(self):
        deltas = [1e-2, 1e-4, 1e-8, 1e-16, 1e-32, 1e-64, 1e-128]
        taus = [triehh_tau(d) for d in deltas]
        assert all(a <= b for a, b in zip(taus, taus[1:]))

    def test_tau_postcondition_grid(self):
        for exponent in range(2, 160, 7):
            delta = 10.0**-exponent
            tau = triehh_tau(delta)
            assert triehh_delta(tau) <= delta
            if tau > 2:
                assert triehh_delta(tau - 1) > delta

    def test_tau_domain(self):
        with pytest.raises(CalibrationError):
            triehh_tau(0.5)

    def test_delta_footnote(self):
        val = triehh_delta(100)
        assert 10**-157.5 <= val <= 10**-156.5

    def test_delta_at_e(self):
        assert triehh_delta(math.e) == pytest.approx(1 / math.e, abs=1e-12)

    def test_delta_at_14(self):
        # mpmath oracle: 3.9813995703400196e-11
        assert triehh_delta(14) == pytest.approx(3.98139957034002e-11, rel=1e-10)

    def test_log_delta_beyond_float_range(self):
        assert triehh_log_delta(1000) == pytest.approx(
            -1000 * math.log(1000) + 999, rel=1e-12
        )

    def test_delta_domain(self):
        with pytest.raises(CalibrationError):
            triehh_delta(1.0)


class TestTrieHHSampleSize:
    def test_companion_note_point(self):
        with pytest.warns(UserWarning, match="small-sample"):
            m = triehh_sample_size(2, 10, 14, 10**5)
        assert m / 10**5 == pytest.approx(18 / 1400, abs=1e-9)
        assert m / 10**5 == pytest.approx(0.012857, abs=1e-5)

    def test_comparator_close_agreement(self):
        m_orig = triehh_sample_size_original(2, 10, 14, 10**5)
        assert m_orig / 10**5 == pytest.approx(0.012948, abs=1e-5)

    def test_zero_epsilon(self):
        assert triehh_sample_size(0, 5, 10, 1000) == 0.0

    def test_inverse_bound(self):
        m = triehh_sample_size(0.5, 5, 10, 10**6)
        assert 10 * 5 * m * 10 / (9 * 10**6) == pytest.approx(0.5, rel=1e-12)

    def test_legacy_params_bundle(self):
        params = TrieHHLegacyParams.for_target(0.5, 1e-10, 10, 10**6)
        assert params.tau == 14
        assert params.m <= params.n
        assert params.gamma_legacy == pytest.approx(params.m / math.sqrt(params.n), rel=1e-12)
