#!/usr/bin/env python3
"""Render figures from the CSV outputs.

Usage:
    python3 scripts/plot_results.py OUT_DIR [FIG_DIR]

Looks for curves.csv, sweep.csv and gaindist.csv under OUT_DIR and writes
PNGs next to them (or into FIG_DIR). Plotting is a convenience for eyeballing
results; nothing in the test suite depends on it.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _load(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def plot_curves(out_dir: Path, fig_dir: Path) -> None:
    path = out_dir / "curves.csv"
    if not path.exists():
        return
    data = _load(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["snr_db"], data["achievable_db"], label="achievable N*G (p-quantile)")
    ax.plot(data["snr_db"], data["required_db"], "k--", label="required N*G")
    ax.set_xlabel("pre-BF SNR (dB)")
    ax.set_ylabel("total BF gain (dB)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_dir / "curves.png", dpi=150)
    plt.close(fig)


def plot_sweep(out_dir: Path, fig_dir: Path) -> None:
    path = out_dir / "sweep.csv"
    if not path.exists():
        return
    data = _load(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    budgets = np.unique(data["overhead_budget"])
    powers = np.unique(data["delta_p_db"])
    mid_power = powers[len(powers) // 2]
    mid_budget = budgets[len(budgets) // 2]
    for budget in budgets:
        mask = (data["overhead_budget"] == budget) & (data["delta_p_db"] == mid_power)
        ax.plot(data["n_radios"][mask], data["max_distance_m"][mask] / 1e3,
                "--o", label=f"L={int(budget)}")
    for power in powers:
        mask = (data["overhead_budget"] == mid_budget) & (data["delta_p_db"] == power)
        ax.plot(data["n_radios"][mask], data["max_distance_m"][mask] / 1e3,
                "-s", alpha=0.7, label=f"dP={power:g} dB")
    mask = (data["overhead_budget"] == mid_budget) & (data["delta_p_db"] == mid_power)
    ax.plot(data["n_radios"][mask], data["ideal_distance_m"][mask] / 1e3,
            "k:", label="ideal N^(2/k)")
    ax.set_xlabel("number of radios N")
    ax.set_ylabel("max range (km)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_dir / "sweep.png", dpi=150)
    plt.close(fig)


def plot_gaindist(out_dir: Path, fig_dir: Path) -> None:
    path = out_dir / "gaindist.csv"
    if not path.exists():
        return
    data = _load(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["g"], data["cdf_analytic"], label="Gamma model")
    ax.plot(data["g"], data["cdf_empirical"], "--", label="empirical")
    ax.set_xlabel("combining gain G")
    ax.set_ylabel("CDF")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_dir / "gaindist.png", dpi=150)
    plt.close(fig)


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    out_dir = Path(sys.argv[1])
    fig_dir = Path(sys.argv[2]) if len(sys.argv) > 2 else out_dir
    fig_dir.mkdir(parents=True, exist_ok=True)
    plot_curves(out_dir, fig_dir)
    plot_sweep(out_dir, fig_dir)
    plot_gaindist(out_dir, fig_dir)
    print(f"figures written to {fig_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
