"""Phase-domain sampling of the coherent combining gain.

Draws i.i.d. Gaussian combining phase errors per radio and evaluates the
realized gain G = |sum_n exp(j*phi_n)|^2 / N directly, providing the
empirical reference for the Gamma model in :mod:`dbfrange.gain_dist`.

Randomness comes from numpy's default PCG64 generator. Streams are
reproducible from an integer seed, and :func:`split_seeds` derives
independent child streams (``SeedSequence.spawn``) so sampling can be
partitioned across workers deterministically: worker i always gets
stream i, and results are concatenated in worker order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GainSampleSet",
    "split_seeds",
    "sample_gain",
    "sample_gains",
    "draw_gain_samples",
    "empirical_quantile",
    "empirical_outage",
]

_CHUNK_VALUES = 8_000_000  # cap on samples * n_radios per block


def split_seeds(seed: int, n_streams: int) -> list[np.random.SeedSequence]:
    """Derive ``n_streams`` independent child seed sequences from ``seed``."""
    return np.random.SeedSequence(seed).spawn(n_streams)


def sample_gains(
    n_radios: int,
    phase_error_var: float,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``n_samples`` realizations of the combining gain."""
    if n_radios < 1:
        raise ValueError("n_radios must be >= 1")
    if phase_error_var < 0.0:
        raise ValueError("phase_error_var must be >= 0")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sigma = np.sqrt(phase_error_var)
    out = np.empty(n_samples)
    block = max(1, _CHUNK_VALUES // n_radios)
    for start in range(0, n_samples, block):
        stop = min(start + block, n_samples)
        phases = rng.normal(0.0, sigma, size=(stop - start, n_radios))
        phasor_sum = np.exp(1j * phases).sum(axis=1)
        out[start:stop] = (phasor_sum.real**2 + phasor_sum.imag**2) / n_radios
    return out


def sample_gain(
    n_radios: int, phase_error_var: float, rng: np.random.Generator
) -> float:
    """One draw of the combining gain."""
    return float(sample_gains(n_radios, phase_error_var, 1, rng)[0])


@dataclass(frozen=True)
class GainSampleSet:
    """A reproducible batch of gain draws for one (N, s2) point."""

    n_radios: int
    phase_error_var: float
    samples: np.ndarray
    seed: int


def draw_gain_samples(
    n_radios: int,
    phase_error_var: float,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> GainSampleSet:
    """Sample a :class:`GainSampleSet` from ``workers`` derived streams.

    The sample count is split evenly across worker streams; stream i
    always produces the same slice for a given seed, so the result does
    not depend on how the work is actually scheduled.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    counts = [n_samples // workers] * workers
    for i in range(n_samples % workers):
        counts[i] += 1
    parts = []
    for child, count in zip(split_seeds(seed, workers), counts):
        if count:
            parts.append(
                sample_gains(
                    n_radios, phase_error_var, count, np.random.default_rng(child)
                )
            )
    return GainSampleSet(
        n_radios=n_radios,
        phase_error_var=phase_error_var,
        samples=np.concatenate(parts),
        seed=seed,
    )


def empirical_quantile(sample_set: GainSampleSet, p: float) -> float:
    """Order-statistic quantile with linear interpolation."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    if len(sample_set.samples) == 0:
        raise ValueError("sample set is empty")
    return float(np.quantile(sample_set.samples, p, method="linear"))


def empirical_outage(
    n_radios: int,
    phase_error_var: float,
    gamma_prebf: float,
    gamma_req: float,
    n_samples: int,
    seed: int,
) -> float:
    """Fraction of draws whose post-BF SNR N*G*gamma_prebf misses gamma_req."""
    gains = sample_gains(
        n_radios, phase_error_var, n_samples, np.random.default_rng(seed)
    )
    return float(np.mean(n_radios * gains * gamma_prebf < gamma_req))
