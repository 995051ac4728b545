"""Maximum-range solver: achievable-vs-required gain intersection.

For each candidate pre-BF SNR the preamble allocation is re-optimized,
the resulting phase-error variance mapped to the outage-constrained gain,
and the total achievable gain N*G compared against the requirement
gamma_req / gamma_preBF. The smallest SNR where the achievable curve
meets the requirement line is refined by bisection and converted to the
maximum deployment distance. Points where the overhead budget cannot fit
the frame carry a -inf dB sentinel (zero gain).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .gain_dist import guaranteed_gain
from .link_budget import LinkBudget, db_to_linear, distance_from_snr, linear_to_db
from .optimizer import InfeasibleBudgetError, PreambleAllocation, optimize_preambles
from .variance import ProtocolConfig

__all__ = [
    "GainCurve",
    "RangeSolution",
    "SweepRow",
    "NoFeasiblePointError",
    "required_gain",
    "gain_curve",
    "min_feasible_snr",
    "max_range",
    "sweep",
]

SNR_TOL_DB = 0.01  # bisection resolution of the crossing


class NoFeasiblePointError(RuntimeError):
    """Requirement unmet everywhere on the SNR grid."""

    def __init__(self, best_margin_db: float):
        self.best_margin_db = best_margin_db
        super().__init__(
            "requirement curve is above the achievable gain on the whole grid "
            f"(best margin {best_margin_db:.2f} dB)"
        )


@dataclass(frozen=True)
class GainCurve:
    """Achievable and required total gain over an SNR grid.

    Carries the generating parameters so the crossing can be refined by
    re-running the same per-point chain between grid points.
    """

    snr_grid_db: np.ndarray
    achievable_total_gain_db: np.ndarray
    required_total_gain_db: np.ndarray
    allocations: list[PreambleAllocation | None]
    cfg: ProtocolConfig
    delta_p_db: float
    gamma_req_db: float
    p_min: float


@dataclass(frozen=True)
class RangeSolution:
    min_feasible_snr_db: float
    max_distance_m: float
    allocation_at_solution: PreambleAllocation
    achieved_gain_at_solution: float
    ideal_distance_m: float


@dataclass(frozen=True)
class SweepRow:
    n_radios: int
    overhead_budget: int
    delta_p_db: float
    solution: RangeSolution | None  # None when no feasible point exists


def required_gain(gamma_prebf: float, gamma_req: float, n_radios: int) -> float:
    """Per-radio combining gain needed to hit gamma_req: gamma_req/(N*gamma)."""
    if gamma_prebf <= 0.0 or gamma_req <= 0.0 or n_radios < 1:
        raise ValueError("SNRs must be > 0 and n_radios >= 1")
    return gamma_req / (n_radios * gamma_prebf)


def _evaluate_point(
    snr_db: float, cfg: ProtocolConfig, delta_p_db: float, p_min: float
) -> tuple[float, PreambleAllocation | None]:
    """Achievable total gain (dB) and allocation at one pre-BF SNR."""
    g_pre = db_to_linear(snr_db)
    g_dr = g_pre * db_to_linear(delta_p_db)
    try:
        alloc = optimize_preambles(cfg, g_pre, g_dr)
    except InfeasibleBudgetError:
        return -math.inf, None
    gain = guaranteed_gain(cfg.n_radios, alloc.achieved_variance, p_min)
    return linear_to_db(cfg.n_radios * gain), alloc


def gain_curve(
    snr_grid_db,
    cfg: ProtocolConfig,
    delta_p_db: float,
    gamma_req_db: float,
    p_min: float,
    threads: int = 1,
) -> GainCurve:
    """Evaluate the achievable and required gain curves over a grid."""
    grid = np.asarray(snr_grid_db, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("SNR grid must be nonempty and strictly increasing")
    points = list(grid)
    if threads == 0:
        threads = min(32, os.cpu_count() or 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda s: _evaluate_point(s, cfg, delta_p_db, p_min), points)
            )
    else:
        results = [_evaluate_point(s, cfg, delta_p_db, p_min) for s in points]
    achievable = np.array([r[0] for r in results])
    allocations = [r[1] for r in results]
    required = gamma_req_db - grid
    return GainCurve(
        snr_grid_db=grid,
        achievable_total_gain_db=achievable,
        required_total_gain_db=required,
        allocations=allocations,
        cfg=cfg,
        delta_p_db=delta_p_db,
        gamma_req_db=gamma_req_db,
        p_min=p_min,
    )


def _margin_db(curve: GainCurve, snr_db: float) -> float:
    ach, _ = _evaluate_point(snr_db, curve.cfg, curve.delta_p_db, curve.p_min)
    return ach - (curve.gamma_req_db - snr_db)


def min_feasible_snr(curve: GainCurve) -> float:
    """Smallest pre-BF SNR (dB) meeting the requirement.

    Finds the first grid point with nonnegative margin and bisects against
    its infeasible neighbor down to ``SNR_TOL_DB``, re-running the full
    optimization chain at each probe. The margin is monotone through the
    crossing; the bracket is checked at runtime and a diagnostic raised if
    its signs are inconsistent.
    """
    margins = curve.achievable_total_gain_db - curve.required_total_gain_db
    feasible = np.flatnonzero(margins >= 0.0)
    if feasible.size == 0:
        raise NoFeasiblePointError(float(np.max(margins)))
    first = int(feasible[0])
    if first == 0:
        return float(curve.snr_grid_db[0])  # feasible at the grid boundary
    lo = float(curve.snr_grid_db[first - 1])
    hi = float(curve.snr_grid_db[first])
    if margins[first - 1] >= 0.0:
        raise RuntimeError(
            "bisection bracket is not a sign change; achievable curve is "
            "not monotone through the crossing"
        )
    while hi - lo > SNR_TOL_DB:
        mid = 0.5 * (lo + hi)
        if _margin_db(curve, mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def max_range(
    cfg: ProtocolConfig,
    link: LinkBudget,
    gamma_req_db: float,
    p_min: float,
    snr_grid_db,
    threads: int = 1,
) -> RangeSolution:
    """Largest distance whose pre-BF SNR still meets the outage constraint."""
    curve = gain_curve(
        snr_grid_db, cfg, link.dest_power_delta_db, gamma_req_db, p_min, threads
    )
    snr_db = min_feasible_snr(curve)
    _, alloc = _evaluate_point(snr_db, cfg, link.dest_power_delta_db, p_min)
    gain = guaranteed_gain(cfg.n_radios, alloc.achieved_variance, p_min)
    gamma_req = db_to_linear(gamma_req_db)
    return RangeSolution(
        min_feasible_snr_db=snr_db,
        max_distance_m=distance_from_snr(db_to_linear(snr_db), link),
        allocation_at_solution=alloc,
        achieved_gain_at_solution=gain,
        ideal_distance_m=distance_from_snr(gamma_req / cfg.n_radios**2, link),
    )


def sweep(
    n_list,
    overhead_list,
    delta_p_list,
    cfg: ProtocolConfig,
    link: LinkBudget,
    gamma_req_db: float,
    p_min: float,
    snr_grid_db,
    threads: int = 1,
) -> list[SweepRow]:
    """Cross-product of (N, L, delta_P) range solutions, one row per cell."""
    if not (n_list and overhead_list and delta_p_list):
        raise ValueError("sweep lists must be nonempty")
    rows = []
    for n_radios in n_list:
        for budget in overhead_list:
            for delta_p in delta_p_list:
                cell_cfg = replace(cfg, n_radios=n_radios, overhead_budget=budget)
                cell_link = replace(link, dest_power_delta_db=delta_p)
                try:
                    solution = max_range(
                        cell_cfg, cell_link, gamma_req_db, p_min, snr_grid_db, threads
                    )
                except (NoFeasiblePointError, InfeasibleBudgetError):
                    solution = None
                rows.append(
                    SweepRow(
                        n_radios=n_radios,
                        overhead_budget=budget,
                        delta_p_db=delta_p,
                        solution=solution,
                    )
                )
    return rows
