import math

import numpy as np
import pytest

from dbfrange.variance import (
    ProtocolConfig,
    combining_phase_variance,
    feedback_variance,
    freq_est_variance,
    kalman_steady_variance,
    overhead_samples,
    phase_est_variance,
)


class TestOverhead:
    def test_minimal_frame(self):
        cfg = ProtocolConfig(
            n_radios=1, zc_repeats=2, zc_length=1, phase_preamble=1,
            feedback_preamble=1, guard1=0, guard2=0, guard3=0,
        )
        assert overhead_samples(cfg) == 4

    def test_reference_layout(self):
        cfg = ProtocolConfig(guard1=10, guard2=10, guard3=10)
        # 2*64 + 6*(70 + 70) + 30
        assert overhead_samples(cfg) == 998

    def test_guards_add_linearly(self):
        cfg = ProtocolConfig()
        bumped = ProtocolConfig(guard1=10)
        assert overhead_samples(bumped) - overhead_samples(cfg) == 10


class TestFreqEstVariance:
    def test_hand_value(self):
        # ((2*10 + 1) / (2*64*1*100)) / (2*pi*64e-6)**2
        assert freq_est_variance(10.0, 2, 64, 1e-6) == pytest.approx(
            10145.878107495753, rel=1e-12
        )

    def test_strictly_decreasing_in_snr(self):
        gammas = np.logspace(-1, 4, 30)
        vals = [freq_est_variance(g, 2, 64, 1e-6) for g in gammas]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_inverse_snr_tail(self):
        # sigma2_fe = Theta(1/gamma): g * var(g) approaches a constant
        hi = 1e9 * freq_est_variance(1e9, 4, 64, 1e-6)
        hi2 = 2e9 * freq_est_variance(2e9, 4, 64, 1e-6)
        assert hi == pytest.approx(hi2, rel=1e-6)

    def test_infinite_snr_is_zero(self):
        assert freq_est_variance(math.inf, 2, 64, 1e-6) == 0.0

    def test_needs_a_repetition_pair(self):
        with pytest.raises(ValueError):
            freq_est_variance(10.0, 1, 64, 1e-6)


class TestKalmanSteadyVariance:
    def test_zero_measurement_noise(self):
        assert kalman_steady_variance(0.0, 1.0) == 0.0

    def test_geometric_mean_regime(self):
        # r >> q: steady state approaches sqrt(q*r)
        r, q = 1e12, 1.0
        assert kalman_steady_variance(r, q) == pytest.approx(
            math.sqrt(q * r), rel=1e-5
        )

    @pytest.mark.parametrize("r", [1e-6, 0.5, 3.0, 1e4, 1e9])
    @pytest.mark.parametrize("q", [1e-3, 1.0, 50.0])
    def test_covariance_fixed_point(self, r, q):
        p = kalman_steady_variance(r, q)
        recursed = (p + q) * r / (p + q + r)
        assert recursed == pytest.approx(p, rel=1e-12)

    def test_never_exceeds_measurement_variance(self):
        for r in np.logspace(-6, 9, 40):
            assert kalman_steady_variance(r, 1.0) <= r

    def test_invalid_process_var(self):
        with pytest.raises(ValueError):
            kalman_steady_variance(1.0, 0.0)


class TestPhaseEstVariance:
    def test_hand_value(self):
        assert phase_est_variance(1.0, 50) == pytest.approx(0.01, rel=1e-15)

    def test_doubling_preamble_halves(self):
        assert phase_est_variance(3.7, 128) == pytest.approx(
            0.5 * phase_est_variance(3.7, 64), rel=1e-15
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            phase_est_variance(0.0, 10)
        with pytest.raises(ValueError):
            phase_est_variance(1.0, 0)


class TestFeedbackVariance:
    def test_hand_value(self):
        assert feedback_variance(10.0, 10) == pytest.approx(0.0105, rel=1e-12)

    def test_high_snr_tail(self):
        # gamma * var -> 1/N_fb as the quadratic term dies off
        assert 1e9 * feedback_variance(1e9, 25) == pytest.approx(1.0 / 25, rel=1e-8)


class TestCombining:
    def test_negligible_eval_time_leaves_phase_terms(self):
        cfg = ProtocolConfig(eval_time_s=1e-30)
        vb = combining_phase_variance(cfg, 1.0, 10.0)
        assert vb.combining_var == vb.phase_est_var + vb.feedback_var

    def test_long_preambles_drive_variance_to_zero(self):
        roomy = ProtocolConfig(
            overhead_budget=10**9, zc_repeats=10**5, phase_preamble=10**6,
            feedback_preamble=10**6,
        )
        vb = combining_phase_variance(roomy, 1.0, 10.0)
        assert vb.combining_var < 1e-5
        tight = combining_phase_variance(ProtocolConfig(), 1.0, 10.0)
        assert vb.combining_var < 1e-4 * tight.combining_var

    def test_aggregate_identity_exact(self):
        cfg = ProtocolConfig()
        vb = combining_phase_variance(cfg, 0.7, 22.0)
        expected = (
            (2.0 * math.pi * cfg.eval_time_s) ** 2 * vb.freq_track_var
            + vb.phase_est_var
            + vb.feedback_var
        )
        assert vb.combining_var == expected

    def test_track_bounded_by_measurement(self):
        for g in np.logspace(-1, 3, 15):
            vb = combining_phase_variance(ProtocolConfig(), g, g * 31.6227766)
            assert vb.freq_track_var <= vb.freq_meas_var

    def test_snr_scaling_shrinks_every_field(self):
        cfg = ProtocolConfig()
        lo = combining_phase_variance(cfg, 0.5, 15.0)
        hi = combining_phase_variance(cfg, 1.5, 45.0)
        for name in (
            "freq_meas_var",
            "freq_track_var",
            "phase_est_var",
            "feedback_var",
            "combining_var",
        ):
            assert getattr(hi, name) < getattr(lo, name)


def _sigma_grid(gamma_prebf=1.0, gamma_dr=31.6227766, size=20):
    """sigma2_e over an (n_zc, n_ph, n_fb) lattice, stage terms broadcast."""
    cfg = ProtocolConfig()
    te_sq = (2.0 * math.pi * cfg.eval_time_s) ** 2
    n_zc = np.arange(2, 2 + size)
    freq = np.array(
        [
            te_sq
            * kalman_steady_variance(
                freq_est_variance(gamma_dr, r, cfg.zc_length, cfg.sample_time_s),
                cfg.kf_process_var,
            )
            for r in n_zc
        ]
    )
    n_ph = np.arange(1, 1 + size)
    n_fb = np.arange(1, 1 + size)
    ph = phase_est_variance(gamma_prebf, n_ph)
    fb = feedback_variance(gamma_dr, n_fb)
    return freq[:, None, None] + ph[None, :, None] + fb[None, None, :]


class TestLatticeShape:
    def test_componentwise_strictly_decreasing(self):
        sigma = _sigma_grid()
        assert np.all(np.diff(sigma, axis=0) < 0)
        assert np.all(np.diff(sigma, axis=1) < 0)
        assert np.all(np.diff(sigma, axis=2) < 0)

    def test_discrete_convexity(self):
        # second finite differences along each axis, rounding-tolerant
        sigma = _sigma_grid()
        for axis in range(3):
            assert np.all(np.diff(sigma, n=2, axis=axis) >= -1e-15)


class TestProtocolConfigValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("n_radios", 0),
            ("zc_repeats", 1),
            ("zc_length", 0),
            ("phase_preamble", 0),
            ("feedback_preamble", 0),
            ("guard2", -1),
            ("payload_len", 0),
            ("sample_time_s", 0.0),
            ("eval_time_s", -1.0),
            ("kf_process_var", 0.0),
        ],
    )
    def test_field_constraints(self, field, value):
        with pytest.raises(ValueError, match=field):
            ProtocolConfig(**{field: value})
