import math

import numpy as np
import pytest

from dbfrange.link_budget import LinkBudget, db_to_linear, distance_from_snr
from dbfrange.range_solver import (
    NoFeasiblePointError,
    gain_curve,
    max_range,
    min_feasible_snr,
    required_gain,
    sweep,
)
from dbfrange.variance import ProtocolConfig

COARSE = np.arange(-30.0, 30.1, 1.0)


def curve_at(n=6, budget=1000, delta_p=15.0, gamma_req_db=5.0, grid=COARSE, p_min=0.9):
    cfg = ProtocolConfig(n_radios=n, overhead_budget=budget)
    return gain_curve(grid, cfg, delta_p, gamma_req_db, p_min)


class TestRequiredGain:
    def test_unit_case(self):
        assert required_gain(2.0, 2.0, 1) == 1.0

    def test_inverse_proportionality(self):
        assert required_gain(0.5, 3.0, 4) == 2.0 * required_gain(1.0, 3.0, 4)

    def test_reference_value(self):
        value = required_gain(db_to_linear(-10.0), db_to_linear(5.0), 6)
        assert value == pytest.approx(5.270462766947299, rel=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            required_gain(0.0, 1.0, 4)
        with pytest.raises(ValueError):
            required_gain(1.0, 1.0, 0)


class TestGainCurve:
    def test_grid_validation(self):
        cfg = ProtocolConfig()
        with pytest.raises(ValueError):
            gain_curve([], cfg, 15.0, 5.0, 0.9)
        with pytest.raises(ValueError):
            gain_curve([0.0, 0.0], cfg, 15.0, 5.0, 0.9)

    def test_single_radio_curve_is_flat_zero(self):
        curve = curve_at(n=1)
        assert np.allclose(curve.achievable_total_gain_db, 0.0, atol=1e-9)

    def test_monotone_and_capped(self):
        curve = curve_at()
        finite = np.isfinite(curve.achievable_total_gain_db)
        values = curve.achievable_total_gain_db[finite]
        assert np.all(np.diff(values) >= -1e-9)
        assert np.all(values <= 20.0 * math.log10(6) + 1e-9)

    def test_required_line(self):
        curve = curve_at()
        assert np.allclose(
            curve.required_total_gain_db, 5.0 - curve.snr_grid_db, atol=1e-12
        )

    def test_infeasible_budget_records_sentinel(self):
        curve = curve_at(budget=100)  # below the 140-sample minimum frame
        assert np.all(np.isneginf(curve.achievable_total_gain_db))
        assert all(a is None for a in curve.allocations)

    def test_pointwise_improvement_with_budget_and_power(self):
        base = curve_at().achievable_total_gain_db
        more_budget = curve_at(budget=2000).achievable_total_gain_db
        more_power = curve_at(delta_p=25.0).achievable_total_gain_db
        assert np.all(more_budget >= base - 1e-9)
        assert np.all(more_power >= base - 1e-9)

    @pytest.mark.parametrize("threads", [0, 4])
    def test_threads_match_serial(self, threads):
        cfg = ProtocolConfig()
        serial = gain_curve(COARSE, cfg, 15.0, 5.0, 0.9, threads=1)
        threaded = gain_curve(COARSE, cfg, 15.0, 5.0, 0.9, threads=threads)
        assert np.array_equal(
            serial.achievable_total_gain_db, threaded.achievable_total_gain_db
        )


class TestMinFeasibleSnr:
    def test_fully_feasible_returns_grid_floor(self):
        curve = curve_at(grid=np.arange(10.0, 31.0, 1.0))
        assert min_feasible_snr(curve) == 10.0

    def test_no_feasible_point(self):
        # requirement stays above the N^2 cap at every grid SNR
        curve = curve_at(gamma_req_db=60.0)
        with pytest.raises(NoFeasiblePointError) as err:
            min_feasible_snr(curve)
        assert err.value.best_margin_db < 0.0

    def test_crossing_certificate_and_tightness(self):
        curve = curve_at()
        snr = min_feasible_snr(curve)
        from dbfrange.range_solver import _margin_db

        assert _margin_db(curve, snr) >= 0.0
        assert _margin_db(curve, snr - 0.05) < 0.0


class TestMaxRange:
    def test_solution_invariants(self):
        cfg = ProtocolConfig()
        link = LinkBudget()
        sol = max_range(cfg, link, 5.0, 0.9, COARSE)
        post_bf = (
            6 * sol.achieved_gain_at_solution * db_to_linear(sol.min_feasible_snr_db)
        )
        assert 10.0 * math.log10(post_bf / db_to_linear(5.0)) >= -0.01
        assert sol.max_distance_m <= sol.ideal_distance_m
        alloc = sol.allocation_at_solution
        assert alloc.achieved_variance > 0.0
        assert alloc.overhead_used <= cfg.overhead_budget

    def test_single_radio_reduces_to_plain_link(self):
        cfg = ProtocolConfig(n_radios=1)
        link = LinkBudget()
        sol = max_range(cfg, link, 5.0, 0.9, np.arange(-30.0, 30.1, 0.25))
        plain = distance_from_snr(db_to_linear(5.0), link)
        assert sol.max_distance_m == pytest.approx(plain, rel=3e-3)
        assert sol.ideal_distance_m == pytest.approx(plain, rel=1e-12)

    def test_ideal_scaling(self):
        link = LinkBudget()
        k = link.path_loss_exponent
        base = max_range(ProtocolConfig(n_radios=1), link, 5.0, 0.9, COARSE)
        four = max_range(ProtocolConfig(n_radios=4), link, 5.0, 0.9, COARSE)
        assert four.ideal_distance_m / base.ideal_distance_m == pytest.approx(
            4.0 ** (2.0 / k), rel=1e-9
        )

    def test_range_grows_with_destination_power(self):
        cfg = ProtocolConfig()
        distances = [
            max_range(
                cfg, LinkBudget(dest_power_delta_db=dp), 5.0, 0.9, COARSE
            ).max_distance_m
            for dp in (5.0, 15.0, 25.0)
        ]
        assert distances[0] < distances[1] < distances[2]


class TestSweep:
    def test_rows_and_bounds(self):
        rows = sweep(
            [2, 4], [1000], [15.0], ProtocolConfig(), LinkBudget(), 5.0, 0.9, COARSE
        )
        assert len(rows) == 2
        for row in rows:
            assert row.solution is not None
            assert row.solution.max_distance_m <= row.solution.ideal_distance_m

    def test_infeasible_cell_is_none(self):
        rows = sweep(
            [6], [100], [15.0], ProtocolConfig(), LinkBudget(), 5.0, 0.9, COARSE
        )
        assert rows[0].solution is None

    def test_empty_lists_rejected(self):
        with pytest.raises(ValueError):
            sweep([], [1000], [15.0], ProtocolConfig(), LinkBudget(), 5.0, 0.9, COARSE)
