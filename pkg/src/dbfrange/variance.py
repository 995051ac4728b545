"""Closed-form error variances of the synchronization chain.

Each protocol stage leaves a residual error on every radio: frequency
estimation from the repeated sync sequence, steady-state Kalman tracking
of that frequency, per-radio phase estimation, and the phase value fed
back from the destination. At the payload evaluation time ``t_e`` they
add up to the combining phase error

    sigma2_e = (2*pi*t_e)**2 * sigma2_f + sigma2_ph + sigma2_fb

with the frequency residue in Hz^2 and the phase terms in rad^2.

The formulas accept numpy arrays for the preamble-length arguments so the
optimizer can sweep lattices without Python loops; SNR arguments are
scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProtocolConfig",
    "VarianceBreakdown",
    "overhead_samples",
    "freq_est_variance",
    "kalman_steady_variance",
    "phase_est_variance",
    "feedback_variance",
    "combining_phase_variance",
]


@dataclass(frozen=True)
class ProtocolConfig:
    """Frame layout and tracking parameters of the beamforming protocol.

    Lengths are in samples. ``feedback_preamble`` is the per-slave
    feedback allocation counted once in the overhead; on the air the
    feedback value is carried by two identical preambles of that length
    (see :mod:`dbfrange.signal_sim`). ``eval_time_s`` is the elapsed time
    between the frequency-correction epoch and the payload sample at
    which the combining gain is evaluated.
    """

    n_radios: int = 6
    overhead_budget: int = 1000
    zc_repeats: int = 2
    zc_length: int = 64
    phase_preamble: int = 70
    feedback_preamble: int = 70
    guard1: int = 0
    guard2: int = 0
    guard3: int = 0
    payload_len: int = 8000
    sample_time_s: float = 1e-6
    eval_time_s: float = 5e-3
    kf_process_var: float = 1.0

    def __post_init__(self):
        if self.n_radios < 1:
            raise ValueError("n_radios: must be >= 1")
        if self.zc_repeats < 2:
            raise ValueError("zc_repeats: must be >= 2")
        if self.zc_length < 1:
            raise ValueError("zc_length: must be >= 1")
        if self.phase_preamble < 1:
            raise ValueError("phase_preamble: must be >= 1")
        if self.feedback_preamble < 1:
            raise ValueError("feedback_preamble: must be >= 1")
        for name in ("guard1", "guard2", "guard3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name}: must be >= 0")
        if self.payload_len < 1:
            raise ValueError("payload_len: must be >= 1")
        if self.sample_time_s <= 0.0:
            raise ValueError("sample_time_s: must be > 0")
        if self.eval_time_s <= 0.0:
            raise ValueError("eval_time_s: must be > 0")
        if self.kf_process_var <= 0.0:
            raise ValueError("kf_process_var: must be > 0")

    @property
    def guard_total(self) -> int:
        return self.guard1 + self.guard2 + self.guard3


@dataclass(frozen=True)
class VarianceBreakdown:
    """Per-stage error variances and their aggregate at ``t_e``."""

    freq_meas_var: float  # Hz^2, raw sync-preamble estimate
    freq_track_var: float  # Hz^2, after steady-state Kalman tracking
    phase_est_var: float  # rad^2
    feedback_var: float  # rad^2
    combining_var: float  # rad^2


def overhead_samples(cfg: ProtocolConfig) -> int:
    """Total samples spent before the payload: sync + per-slave slots + guards."""
    return (
        cfg.zc_repeats * cfg.zc_length
        + cfg.n_radios * (cfg.phase_preamble + cfg.feedback_preamble)
        + cfg.guard_total
    )


def freq_est_variance(gamma_dr, zc_repeats, zc_length, sample_time_s):
    """Variance (Hz^2) of the repeated-sequence frequency estimator.

    var = (2*g + (R-1)) / (2*M*(R-1)**2 * g**2) / (2*pi*M*Ts)**2

    with R repetitions of an M-sample constant-envelope sequence received
    at linear SNR g. Strictly decreasing and discretely convex in R.
    """
    if np.any(np.asarray(gamma_dr) <= 0.0):
        raise ValueError("gamma_dr must be > 0")
    if np.any(np.asarray(zc_repeats) < 2):
        raise ValueError("zc_repeats must be >= 2 (needs a repetition pair)")
    if zc_length < 1 or sample_time_s <= 0.0:
        raise ValueError("zc_length must be >= 1 and sample_time_s > 0")
    if np.isscalar(gamma_dr) and math.isinf(gamma_dr):
        return 0.0
    m = zc_length
    pairs = np.asarray(zc_repeats) - 1
    num = 2.0 * gamma_dr + pairs
    den = 2.0 * m * pairs * pairs * gamma_dr * gamma_dr
    scale = 1.0 / (2.0 * math.pi * m * sample_time_s) ** 2
    return (num / den) * scale


def kalman_steady_variance(freq_meas_var, process_var):
    """Steady-state posterior variance of the scalar random-walk Kalman filter.

    Fixed point of P <- (P + q) * r / (P + q + r) with measurement
    variance r and process variance q, i.e. the positive root of
    P**2 + q*P - q*r = 0.
    """
    if process_var <= 0.0:
        raise ValueError("process_var must be > 0")
    if np.any(np.asarray(freq_meas_var) < 0.0):
        raise ValueError("freq_meas_var must be >= 0")
    q = process_var
    return 0.5 * (-q + q * np.sqrt(1.0 + 4.0 * freq_meas_var / q))


def phase_est_variance(gamma_prebf, n_ph):
    """Variance (rad^2) of correlate-and-arctan phase estimation: 1/(2*N_ph*g)."""
    if np.any(np.asarray(gamma_prebf) <= 0.0):
        raise ValueError("gamma_prebf must be > 0")
    if np.any(np.asarray(n_ph) < 1):
        raise ValueError("n_ph must be >= 1")
    return 1.0 / (2.0 * n_ph * gamma_prebf)


def feedback_variance(gamma_dr, n_fb):
    """Variance (rad^2) of the phase-difference feedback decoder.

    var = 1/(N_fb*g) + 1/(2*N_fb*g**2), with N_fb samples per preamble.
    """
    if np.any(np.asarray(gamma_dr) <= 0.0):
        raise ValueError("gamma_dr must be > 0")
    if np.any(np.asarray(n_fb) < 1):
        raise ValueError("n_fb must be >= 1")
    return 1.0 / (n_fb * gamma_dr) + 1.0 / (2.0 * n_fb * gamma_dr * gamma_dr)


def combining_phase_variance(
    cfg: ProtocolConfig, gamma_prebf: float, gamma_dr: float
) -> VarianceBreakdown:
    """Evaluate every stage variance for ``cfg`` and aggregate at ``t_e``."""
    s_fe = freq_est_variance(
        gamma_dr, cfg.zc_repeats, cfg.zc_length, cfg.sample_time_s
    )
    s_f = kalman_steady_variance(s_fe, cfg.kf_process_var)
    s_ph = phase_est_variance(gamma_prebf, cfg.phase_preamble)
    s_fb = feedback_variance(gamma_dr, cfg.feedback_preamble)
    total = (2.0 * math.pi * cfg.eval_time_s) ** 2 * s_f + s_ph + s_fb
    return VarianceBreakdown(
        freq_meas_var=float(s_fe),
        freq_track_var=float(s_f),
        phase_est_var=float(s_ph),
        feedback_var=float(s_fb),
        combining_var=float(total),
    )
