"""Shared test oracles.

The brute-force optimizer enumerates the full integer lattice with no
pruning, evaluating the objective through the same variance formulas as
the production search so that values can be compared exactly.
"""

import math

import numpy as np

from dbfrange.optimizer import _slot_budget
from dbfrange.variance import (
    feedback_variance,
    freq_est_variance,
    kalman_steady_variance,
    phase_est_variance,
)


def brute_force_optimize(cfg, gamma_prebf, gamma_dr):
    """Exhaustive argmin over every feasible triple, lexicographic tie-break.

    Returns (sigma_e, n_zc, n_ph, n_fb) or None when infeasible.
    """
    te_sq = (2.0 * math.pi * cfg.eval_time_s) ** 2
    best = None
    n_zc = 2
    while True:
        s_max = _slot_budget(cfg, n_zc)
        if s_max < 2:
            break
        s_fe = freq_est_variance(gamma_dr, n_zc, cfg.zc_length, cfg.sample_time_s)
        freq_term = te_sq * kalman_steady_variance(s_fe, cfg.kf_process_var)
        side = np.arange(1, s_max)
        ph_grid, fb_grid = np.meshgrid(side, side, indexing="ij")
        sigma = (
            freq_term
            + phase_est_variance(gamma_prebf, ph_grid)
            + feedback_variance(gamma_dr, fb_grid)
        )
        sigma = np.where(ph_grid + fb_grid <= s_max, sigma, np.inf)
        flat = int(np.argmin(sigma))  # row-major: first = smallest n_ph, then n_fb
        i, j = divmod(flat, sigma.shape[1])
        cand = (float(sigma[i, j]), n_zc, int(ph_grid[i, j]), int(fb_grid[i, j]))
        if best is None or cand < best:
            best = cand
        n_zc += 1
    return best
