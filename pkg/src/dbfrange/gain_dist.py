"""Gamma model of the coherent combining gain.

With i.i.d. zero-mean Gaussian combining phase errors of variance s2 on
each of N radios, the coherent gain G = |sum_n exp(j*phi_n)|^2 / N is
well approximated by N - X with X ~ Gamma(K, theta), where

    K     = N*(N-1) / ((1 - e)**2 + 2*N*e)
    theta = (1 - e) * ((1 - e)**2 + 2*N*e) / N,      e = exp(-s2).

The approximation matches the exact mean E[G] = 1 + (N-1)*e and holds
tightly for small s2 or large N. Its support is unbounded below, so gains
computed from it are clamped to the physical range [0, N]. s2 = 0 and
N = 1 collapse to point masses at N and 1 respectively.

The regularized lower incomplete gamma function P(a, x) is evaluated with
the classic series / continued-fraction split (series for x < a + 1,
Lentz's continued fraction otherwise); quantiles come from a
bisection-safeguarded Newton iteration on P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GainDistribution",
    "gamma_params",
    "gain_cdf",
    "gain_quantile",
    "guaranteed_gain",
    "reg_lower_gamma",
]

_EPS = 1e-15
_MAX_ITER = 600


def _series_lower(a: float, x: np.ndarray) -> np.ndarray:
    # P(a, x) via the power series, valid and fast for x < a + 1
    ap = a
    total = np.full_like(x, 1.0 / a)
    term = total.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if np.all(np.abs(term) < np.abs(total) * _EPS):
            break
    log_pref = a * np.log(x) - x - math.lgamma(a)
    return total * np.exp(log_pref)


def _contfrac_upper(a: float, x: np.ndarray) -> np.ndarray:
    # Q(a, x) via Lentz's modified continued fraction, for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        np.copyto(d, tiny, where=np.abs(d) < tiny)
        c = b + an / c
        np.copyto(c, tiny, where=np.abs(c) < tiny)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < _EPS):
            break
    log_pref = a * np.log(x) - x - math.lgamma(a)
    return np.exp(log_pref) * h


def reg_lower_gamma(a: float, x):
    """Regularized lower incomplete gamma P(a, x) for scalar a > 0.

    Accepts scalar or array ``x``; values <= 0 map to 0 and +inf maps
    to 1. Accuracy is limited by the series/continued-fraction cutoff at
    machine precision.
    """
    if a <= 0.0:
        raise ValueError("shape parameter must be > 0")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_flat = np.atleast_1d(x_arr).copy()
    out = np.empty_like(x_flat)

    nonpos = x_flat <= 0.0
    infinite = np.isinf(x_flat) & ~nonpos
    out[nonpos] = 0.0
    out[infinite] = 1.0
    todo = ~(nonpos | infinite)

    lower = todo & (x_flat < a + 1.0)
    upper = todo & ~lower
    if np.any(lower):
        out[lower] = _series_lower(a, x_flat[lower])
    if np.any(upper):
        out[upper] = 1.0 - _contfrac_upper(a, x_flat[upper])
    np.clip(out, 0.0, 1.0, out=out)
    return float(out[0]) if scalar else out.reshape(x_arr.shape)


def _gamma_unit_quantile(a: float, p: float) -> float:
    """Solve P(a, z) = p for z (unit scale), to 1e-12 in probability."""
    if not 0.0 < p < 1.0:
        raise ValueError("probability must be in (0, 1)")
    lo, hi = 0.0, a + 10.0 * math.sqrt(a) + 10.0
    while reg_lower_gamma(a, hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("quantile bracket expansion failed")
    z = a if lo < a < hi else 0.5 * (lo + hi)
    log_gam = math.lgamma(a)
    for _ in range(200):
        f = reg_lower_gamma(a, z) - p
        if abs(f) <= 1e-12:
            return z
        if f < 0.0:
            lo = z
        else:
            hi = z
        log_pdf = (a - 1.0) * math.log(z) - z - log_gam
        step_ok = -700.0 < log_pdf < 700.0
        if step_ok:
            z_new = z - f / math.exp(log_pdf)
            step_ok = lo < z_new < hi
        if not step_ok:
            z_new = 0.5 * (lo + hi)
        if z_new == z:
            break
        z = z_new
    return z


@dataclass(frozen=True)
class GainDistribution:
    """Gamma parameters of the combining-gain model for (N, s2)."""

    n_radios: int
    phase_error_var: float  # rad^2
    shape: float  # K
    scale: float  # theta

    @property
    def degenerate(self) -> bool:
        # point mass at N: a single radio, or error-free combining
        return self.n_radios == 1 or self.scale == 0.0

    def mean(self) -> float:
        return self.n_radios - self.shape * self.scale

    def variance(self) -> float:
        return self.shape * self.scale * self.scale


def gamma_params(n_radios: int, phase_error_var: float) -> GainDistribution:
    """Map (N, s2) to the Gamma parameters (K, theta) of N - G."""
    if n_radios < 1:
        raise ValueError("n_radios must be >= 1")
    if phase_error_var < 0.0:
        raise ValueError("phase_error_var must be >= 0")
    n = n_radios
    e = math.exp(-phase_error_var)
    one_minus = -math.expm1(-phase_error_var)  # 1 - e, accurate for small s2
    denom = one_minus * one_minus + 2.0 * n * e
    shape = n * (n - 1) / denom
    scale = one_minus * denom / n
    return GainDistribution(
        n_radios=n, phase_error_var=phase_error_var, shape=shape, scale=scale
    )


def gain_cdf(g, dist: GainDistribution):
    """P(G <= g). Accepts scalar or array ``g``; outside [0, N] returns 0/1."""
    n = dist.n_radios
    g_arr = np.asarray(g, dtype=float)
    scalar = g_arr.ndim == 0
    g_flat = np.atleast_1d(g_arr)
    if dist.degenerate:
        out = np.where(g_flat >= n, 1.0, 0.0)
    else:
        out = np.empty_like(g_flat, dtype=float)
        below = g_flat < 0.0
        above = g_flat >= n
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = 1.0
        if np.any(mid):
            x = (n - g_flat[mid]) / dist.scale
            out[mid] = 1.0 - reg_lower_gamma(dist.shape, x)
    return float(out[0]) if scalar else out.reshape(g_arr.shape)


def gain_quantile(p: float, dist: GainDistribution) -> float:
    """Gain g with P(G <= g) = p, clamped to the physical range [0, N]."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    n = dist.n_radios
    if dist.degenerate:
        return float(n)
    z = _gamma_unit_quantile(dist.shape, 1.0 - p)
    return float(min(max(n - dist.scale * z, 0.0), float(n)))


def guaranteed_gain(n_radios: int, phase_error_var: float, p_min: float) -> float:
    """Gain achieved with probability at least ``p_min``."""
    if not 0.0 < p_min < 1.0:
        raise ValueError("p_min must be in (0, 1)")
    return gain_quantile(1.0 - p_min, gamma_params(n_radios, phase_error_var))
