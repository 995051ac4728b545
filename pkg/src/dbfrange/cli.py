"""Command-line interface.

Subcommands: curves, range, sweep, optimize, gaindist, montecarlo,
simulate. Every config field can be overridden with a long flag of the
same name; results are written as CSV files with fixed headers into the
output directory, and a one-line summary is printed. Exit codes: 0 ok,
1 usage, 2 config validation, 3 infeasible, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, config_to_dict, from_dict, parse_config, snr_grid
from .gain_dist import gain_cdf, gamma_params
from .link_budget import db_to_linear, prebf_snr
from .montecarlo import draw_gain_samples, empirical_quantile
from .optimizer import InfeasibleBudgetError, optimize_preambles
from .range_solver import NoFeasiblePointError, gain_curve, max_range, sweep
from .signal_sim import run_protocol_trials, wrap_phase
from .variance import combining_phase_variance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1 (argparse default is 2, reserved for config errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


_OVERRIDES = {
    # config field -> (json section or None for top level, value type)
    "tx_power_dbm": ("link", float),
    "dest_power_delta_db": ("link", float),
    "noise_figure_db": ("link", float),
    "noise_bandwidth_hz": ("link", float),
    "wavelength_m": ("link", float),
    "path_loss_exponent": ("link", float),
    "path_loss_model": ("link", str),
    "n_radios": ("protocol", int),
    "overhead_budget": ("protocol", int),
    "zc_repeats": ("protocol", int),
    "zc_length": ("protocol", int),
    "phase_preamble": ("protocol", int),
    "feedback_preamble": ("protocol", int),
    "guard1": ("protocol", int),
    "guard2": ("protocol", int),
    "guard3": ("protocol", int),
    "payload_len": ("protocol", int),
    "sample_time_s": ("protocol", float),
    "eval_time_s": ("protocol", float),
    "kf_process_var": ("protocol", float),
    "gamma_req_db": ("solver", float),
    "p_min": ("solver", float),
    "grid_min_db": ("solver", float),
    "grid_max_db": ("solver", float),
    "grid_step_db": ("solver", float),
    "seed": (None, int),
    "output_dir": (None, str),
}

_SWEEP_OVERRIDES = {
    "sweep_n_radios": ("n_radios", int),
    "sweep_overhead_budget": ("overhead_budget", int),
    "sweep_dest_power_delta_db": ("dest_power_delta_db", float),
}


def _csv_list(kind):
    def convert(text):
        return [kind(part) for part in text.split(",") if part != ""]

    return convert


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    for name, (_, kind) in _OVERRIDES.items():
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, type=kind, default=None)
    for name, (_, kind) in _SWEEP_OVERRIDES.items():
        flag = "--" + name.replace("_", "-")
        parser.add_argument(
            flag, dest=name, type=_csv_list(kind), default=None, metavar="A,B,..."
        )
    parser.add_argument("--config", default=None, help="JSON run-config file")
    parser.add_argument(
        "--threads", type=int, default=1, help="worker cap for grid sweeps (0 = auto)"
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="dbfrange", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    _add_override_flags(common)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("curves", parents=[common], help="achievable vs required gain grid")
    sub.add_parser("range", parents=[common], help="maximum-distance solution")
    sub.add_parser("sweep", parents=[common], help="range over N x L x deltaP lists")

    p_opt = sub.add_parser("optimize", parents=[common], help="preamble allocation")
    p_opt.add_argument("--prebf-snr-db", type=float, default=0.0)

    p_gd = sub.add_parser("gaindist", parents=[common], help="gain CDF, model vs draws")
    p_gd.add_argument("--sigma-e", type=float, default=0.1, help="phase-error variance rad^2")
    p_gd.add_argument("--mc-samples", type=int, default=200_000)
    p_gd.add_argument("--grid-points", type=int, default=201)

    p_mc = sub.add_parser("montecarlo", parents=[common], help="empirical gain CDF")
    p_mc.add_argument("--sigma-e", type=float, default=0.1)
    p_mc.add_argument("--samples", type=int, default=100_000)

    p_sim = sub.add_parser("simulate", parents=[common], help="waveform protocol trials")
    p_sim.add_argument("--trials", type=int, default=1000)
    p_sim.add_argument("--distance-m", type=float, default=None)
    p_sim.add_argument("--prebf-snr-db", type=float, default=0.0)
    return parser


def load_config(args) -> RunConfig:
    raw = {}
    if args.config is not None:
        raw = config_to_dict(parse_config(args.config))
    for name, (section, _) in _OVERRIDES.items():
        value = getattr(args, name, None)
        if value is None:
            continue
        if section is None:
            raw[name] = value
        else:
            raw.setdefault(section, {})[name] = value
    for name, (json_name, _) in _SWEEP_OVERRIDES.items():
        value = getattr(args, name, None)
        if value is not None:
            raw.setdefault("sweep", {})[json_name] = value
    return from_dict(raw)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_curves(config: RunConfig, args) -> int:
    curve = gain_curve(
        snr_grid(config),
        config.protocol,
        config.link.dest_power_delta_db,
        config.gamma_req_db,
        config.p_min,
        threads=args.threads,
    )
    rows = []
    for i, snr_db in enumerate(curve.snr_grid_db):
        alloc = curve.allocations[i]
        rows.append(
            (
                snr_db,
                curve.achievable_total_gain_db[i],
                curve.required_total_gain_db[i],
                alloc.zc_repeats if alloc else None,
                alloc.phase_preamble if alloc else None,
                alloc.feedback_preamble if alloc else None,
            )
        )
    path = _out_dir(config) / "curves.csv"
    write_csv(path, ["snr_db", "achievable_db", "required_db", "n_zc", "n_ph", "n_fb"], rows)
    print(f"curves: {len(rows)} grid points -> {path}")
    return EXIT_OK


def cmd_range(config: RunConfig, args) -> int:
    solution = max_range(
        config.protocol,
        config.link,
        config.gamma_req_db,
        config.p_min,
        snr_grid(config),
        threads=args.threads,
    )
    alloc = solution.allocation_at_solution
    path = _out_dir(config) / "range.csv"
    write_csv(
        path,
        [
            "min_feasible_snr_db",
            "max_distance_m",
            "ideal_distance_m",
            "achieved_gain",
            "sigma_e",
            "n_zc",
            "n_ph",
            "n_fb",
            "overhead_used",
        ],
        [
            (
                solution.min_feasible_snr_db,
                solution.max_distance_m,
                solution.ideal_distance_m,
                solution.achieved_gain_at_solution,
                alloc.achieved_variance,
                alloc.zc_repeats,
                alloc.phase_preamble,
                alloc.feedback_preamble,
                alloc.overhead_used,
            )
        ],
    )
    note = ""
    if solution.min_feasible_snr_db == config.grid_min_db:
        note = " (feasible at the grid floor; widen grid_min_db for the true crossing)"
    print(
        f"range: min SNR {solution.min_feasible_snr_db:.2f} dB, "
        f"max distance {solution.max_distance_m:.1f} m, "
        f"allocation (n_zc={alloc.zc_repeats}, n_ph={alloc.phase_preamble}, "
        f"n_fb={alloc.feedback_preamble}){note} -> {path}"
    )
    return EXIT_OK


def cmd_sweep(config: RunConfig, args) -> int:
    rows = sweep(
        list(config.sweep_n_radios),
        list(config.sweep_overhead_budget),
        list(config.sweep_dest_power_delta_db),
        config.protocol,
        config.link,
        config.gamma_req_db,
        config.p_min,
        snr_grid(config),
        threads=args.threads,
    )
    out_rows = []
    for row in rows:
        sol = row.solution
        alloc = sol.allocation_at_solution if sol else None
        out_rows.append(
            (
                row.n_radios,
                row.overhead_budget,
                row.delta_p_db,
                sol.min_feasible_snr_db if sol else None,
                sol.max_distance_m if sol else None,
                sol.ideal_distance_m if sol else None,
                alloc.zc_repeats if alloc else None,
                alloc.phase_preamble if alloc else None,
                alloc.feedback_preamble if alloc else None,
            )
        )
    path = _out_dir(config) / "sweep.csv"
    write_csv(
        path,
        [
            "n_radios",
            "overhead_budget",
            "delta_p_db",
            "min_feasible_snr_db",
            "max_distance_m",
            "ideal_distance_m",
            "n_zc",
            "n_ph",
            "n_fb",
        ],
        out_rows,
    )
    solved = sum(1 for r in rows if r.solution is not None)
    print(f"sweep: {solved}/{len(rows)} cells feasible -> {path}")
    return EXIT_OK


def cmd_optimize(config: RunConfig, args) -> int:
    g_pre = db_to_linear(args.prebf_snr_db)
    g_dr = g_pre * db_to_linear(config.link.dest_power_delta_db)
    alloc = optimize_preambles(config.protocol, g_pre, g_dr)
    path = _out_dir(config) / "optimize.csv"
    write_csv(
        path,
        ["prebf_snr_db", "n_zc", "n_ph", "n_fb", "sigma_e", "overhead_used"],
        [
            (
                args.prebf_snr_db,
                alloc.zc_repeats,
                alloc.phase_preamble,
                alloc.feedback_preamble,
                alloc.achieved_variance,
                alloc.overhead_used,
            )
        ],
    )
    print(
        f"optimize: (n_zc={alloc.zc_repeats}, n_ph={alloc.phase_preamble}, "
        f"n_fb={alloc.feedback_preamble}) sigma_e={alloc.achieved_variance:.6g} rad^2 "
        f"using {alloc.overhead_used}/{config.protocol.overhead_budget} -> {path}"
    )
    return EXIT_OK


def cmd_gaindist(config: RunConfig, args) -> int:
    n = config.protocol.n_radios
    dist = gamma_params(n, args.sigma_e)
    samples = draw_gain_samples(n, args.sigma_e, args.mc_samples, config.seed)
    sorted_samples = np.sort(samples.samples)
    grid = np.linspace(0.0, float(n), args.grid_points)
    analytic = gain_cdf(grid, dist)
    empirical = np.searchsorted(sorted_samples, grid, side="right") / len(sorted_samples)
    path = _out_dir(config) / "gaindist.csv"
    write_csv(
        path,
        ["g", "cdf_analytic", "cdf_empirical"],
        zip(grid, analytic, empirical),
    )
    print(
        f"gaindist: N={n} sigma_e={args.sigma_e:g} K={dist.shape:.6g} "
        f"theta={dist.scale:.6g} max|dF|="
        f"{float(np.max(np.abs(analytic - empirical))):.4f} -> {path}"
    )
    return EXIT_OK


def cmd_montecarlo(config: RunConfig, args) -> int:
    n = config.protocol.n_radios
    samples = draw_gain_samples(n, args.sigma_e, args.samples, config.seed)
    sorted_samples = np.sort(samples.samples)
    grid = np.linspace(0.0, float(n), 201)
    empirical = np.searchsorted(sorted_samples, grid, side="right") / len(sorted_samples)
    path = _out_dir(config) / "montecarlo.csv"
    write_csv(path, ["g", "cdf_empirical"], zip(grid, empirical))
    print(
        f"montecarlo: N={n} sigma_e={args.sigma_e:g} samples={args.samples} "
        f"mean={samples.samples.mean():.6g} var={samples.samples.var():.6g} "
        f"q10={empirical_quantile(samples, 0.1):.6g} "
        f"q90={empirical_quantile(samples, 0.9):.6g} -> {path}"
    )
    return EXIT_OK


def cmd_simulate(config: RunConfig, args) -> int:
    rng = np.random.default_rng(config.seed)
    if args.distance_m is not None:
        distance = args.distance_m
        override = None
        g_pre = None
    else:
        distance = None
        override = db_to_linear(args.prebf_snr_db)
        g_pre = override
    freq_err, phase_err, gains = run_protocol_trials(
        config.protocol,
        config.link,
        distance,
        args.trials,
        rng,
        prebf_snr_override=override,
    )
    rows = []
    for t in range(args.trials):
        for r in range(config.protocol.n_radios):
            rows.append((t, r, freq_err[t, r], phase_err[t, r], gains[t]))
    out = _out_dir(config)
    write_csv(
        out / "sim.csv",
        ["trial", "radio", "freq_error_hz", "phase_error_rad", "realized_gain"],
        rows,
    )
    if g_pre is None:
        g_pre = prebf_snr(distance, config.link)
    g_dr = g_pre * db_to_linear(config.link.dest_power_delta_db)
    model = combining_phase_variance(config.protocol, g_pre, g_dr)
    emp_sigma_e = float(phase_err.var())
    emp_freq = float(freq_err.var())
    # residual phase with the frequency contribution removed: the
    # estimation + feedback part of the error budget
    phase_fb = wrap_phase(
        phase_err - 2.0 * np.pi * freq_err * config.protocol.eval_time_s
    )
    write_csv(
        out / "sim_summary.csv",
        [
            "trials",
            "sigma_e_emp",
            "sigma_e_model",
            "freq_var_emp",
            "freq_var_model",
            "phasefb_var_emp",
            "phasefb_var_model",
            "mean_gain",
        ],
        [
            (
                args.trials,
                emp_sigma_e,
                model.combining_var,
                emp_freq,
                model.freq_track_var,
                float(phase_fb.var()),
                model.phase_est_var + model.feedback_var,
                float(gains.mean()),
            )
        ],
    )
    print(
        f"simulate: {args.trials} trials, sigma_e emp/model "
        f"{emp_sigma_e:.6g}/{model.combining_var:.6g} rad^2, mean gain "
        f"{float(gains.mean()):.4f}/{config.protocol.n_radios} -> {out / 'sim.csv'}"
    )
    return EXIT_OK


_COMMANDS = {
    "curves": cmd_curves,
    "range": cmd_range,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "gaindist": cmd_gaindist,
    "montecarlo": cmd_montecarlo,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args)
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleBudgetError, NoFeasiblePointError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
