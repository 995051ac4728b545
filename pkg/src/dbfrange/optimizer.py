"""Integer preamble-length allocation under the overhead budget.

Chooses (zc_repeats, phase_preamble, feedback_preamble) minimizing the
combining phase-error variance subject to the total-overhead constraint.
The objective is strictly decreasing in each length, so for a fixed
(zc_repeats, phase_preamble) pair the best feedback length is the largest
feasible one; the remaining 2-D scan is evaluated exhaustively with the
vectorized variance formulas. Ties are broken toward the smallest
zc_repeats, then phase_preamble, then feedback_preamble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .variance import (
    ProtocolConfig,
    combining_phase_variance,
    feedback_variance,
    freq_est_variance,
    kalman_steady_variance,
    overhead_samples,
    phase_est_variance,
)

__all__ = [
    "PreambleAllocation",
    "InfeasibleBudgetError",
    "minimum_overhead",
    "count_feasible",
    "enumerate_feasible",
    "optimize_preambles",
]


class InfeasibleBudgetError(ValueError):
    """Overhead budget below the smallest possible frame."""

    def __init__(self, budget: int, minimum: int):
        self.budget = budget
        self.minimum = minimum
        super().__init__(
            f"overhead budget {budget} is below the minimal feasible "
            f"overhead {minimum} (zc_repeats=2, phase/feedback preambles of 1)"
        )


@dataclass(frozen=True)
class PreambleAllocation:
    zc_repeats: int
    phase_preamble: int
    feedback_preamble: int
    achieved_variance: float  # rad^2 at the optimum
    overhead_used: int  # samples


def minimum_overhead(cfg: ProtocolConfig) -> int:
    """Smallest overhead any feasible allocation can use."""
    return 2 * cfg.zc_length + 2 * cfg.n_radios + cfg.guard_total


def _slot_budget(cfg: ProtocolConfig, n_zc: int) -> int:
    # max value of phase_preamble + feedback_preamble for this n_zc
    return (cfg.overhead_budget - cfg.guard_total - n_zc * cfg.zc_length) // cfg.n_radios


def enumerate_feasible(cfg: ProtocolConfig) -> Iterator[tuple[int, int, int]]:
    """Yield every feasible (n_zc, n_ph, n_fb) in ascending lexicographic order."""
    n_zc = 2
    while True:
        s_max = _slot_budget(cfg, n_zc)
        if s_max < 2:
            return
        for n_ph in range(1, s_max):
            for n_fb in range(1, s_max - n_ph + 1):
                yield (n_zc, n_ph, n_fb)
        n_zc += 1


def count_feasible(cfg: ProtocolConfig) -> int:
    """Number of feasible triples, without enumerating them."""
    total = 0
    n_zc = 2
    while True:
        s_max = _slot_budget(cfg, n_zc)
        if s_max < 2:
            return total
        total += s_max * (s_max - 1) // 2
        n_zc += 1


def optimize_preambles(
    cfg: ProtocolConfig, gamma_prebf: float, gamma_dr: float
) -> PreambleAllocation:
    """Global integer minimizer of the combining phase-error variance.

    Raises :class:`InfeasibleBudgetError` when the budget cannot fit the
    smallest frame. SNRs must be finite (at infinite SNR every allocation
    ties at zero variance and the problem is degenerate).
    """
    if not (math.isfinite(gamma_prebf) and math.isfinite(gamma_dr)):
        raise ValueError("SNRs must be finite for preamble optimization")
    if gamma_prebf <= 0.0 or gamma_dr <= 0.0:
        raise ValueError("SNRs must be > 0")
    if _slot_budget(cfg, 2) < 2:
        raise InfeasibleBudgetError(cfg.overhead_budget, minimum_overhead(cfg))

    te_sq = (2.0 * math.pi * cfg.eval_time_s) ** 2
    best: tuple[float, int, int, int] | None = None
    n_zc = 2
    while True:
        s_max = _slot_budget(cfg, n_zc)
        if s_max < 2:
            break
        s_fe = freq_est_variance(gamma_dr, n_zc, cfg.zc_length, cfg.sample_time_s)
        freq_term = te_sq * kalman_steady_variance(s_fe, cfg.kf_process_var)
        n_ph = np.arange(1, s_max)
        n_fb = s_max - n_ph  # largest feasible: variance is decreasing in n_fb
        sigma = (
            freq_term
            + phase_est_variance(gamma_prebf, n_ph)
            + feedback_variance(gamma_dr, n_fb)
        )
        i = int(np.argmin(sigma))  # first minimum = smallest n_ph
        cand = (float(sigma[i]), n_zc, int(n_ph[i]), int(n_fb[i]))
        if best is None or cand < best:
            best = cand
        n_zc += 1

    _, zc, ph, fb = best
    solved = replace(
        cfg, zc_repeats=zc, phase_preamble=ph, feedback_preamble=fb
    )
    breakdown = combining_phase_variance(solved, gamma_prebf, gamma_dr)
    return PreambleAllocation(
        zc_repeats=zc,
        phase_preamble=ph,
        feedback_preamble=fb,
        achieved_variance=breakdown.combining_var,
        overhead_used=overhead_samples(solved),
    )
