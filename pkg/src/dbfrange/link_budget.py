"""Distance <-> SNR conversions for the beamforming link budget.

All SNRs are linear power ratios unless a name says dB; distances are in
meters. Two path-loss conventions are supported:

* ``LOG_DISTANCE_POWER`` (default): free-space loss at a 1 m reference
  plus ``10 * k * log10(d)`` dB beyond it. Scaling the required SNR by
  ``N**2`` scales the solvable distance by ``N**(2/k)``.
* ``AMPLITUDE_EXPONENT``: amplitude attenuation ``a = (lambda/(2*pi)) *
  d**k`` applied to the field, i.e. ``snr = p / (a**2 * n)``. Under this
  convention an ``N**2`` SNR factor buys only ``N**(1/k)`` in distance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

THERMAL_NOISE_DBM_PER_HZ = -174.0  # kT at 290 K


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0.0:
        return -math.inf
    return 10.0 * math.log10(x)


class PathLossModel(enum.Enum):
    """How distance converts to received-power attenuation."""

    LOG_DISTANCE_POWER = "log_distance_power"
    AMPLITUDE_EXPONENT = "amplitude_exponent"


@dataclass(frozen=True)
class LinkBudget:
    """Radio powers, noise parameters and the propagation model.

    ``tx_power_dbm`` is the per-radio transmit power; the destination
    transmits ``dest_power_delta_db`` dB above it, which raises the SNR of
    everything sent on the downlink (sync preamble, phase feedback).
    """

    tx_power_dbm: float = 0.0
    dest_power_delta_db: float = 15.0
    noise_figure_db: float = 3.0
    noise_bandwidth_hz: float = 1e6
    wavelength_m: float = 0.3261
    path_loss_exponent: float = 2.3
    path_loss_model: PathLossModel = PathLossModel.LOG_DISTANCE_POWER

    def __post_init__(self):
        if self.dest_power_delta_db < 0.0:
            raise ValueError("dest_power_delta_db: must be >= 0 dB")
        if self.noise_bandwidth_hz <= 0.0:
            raise ValueError("noise_bandwidth_hz: must be > 0")
        if self.wavelength_m <= 0.0:
            raise ValueError("wavelength_m: must be > 0")
        if self.path_loss_exponent <= 0.0:
            raise ValueError("path_loss_exponent: must be > 0")


def noise_power_dbm(link: LinkBudget) -> float:
    """Receiver noise power in dBm: -174 + 10*log10(B) + NF."""
    return (
        THERMAL_NOISE_DBM_PER_HZ
        + 10.0 * math.log10(link.noise_bandwidth_hz)
        + link.noise_figure_db
    )


def _fspl_1m_db(link: LinkBudget) -> float:
    # free-space loss at the 1 m reference distance
    return 20.0 * math.log10(4.0 * math.pi / link.wavelength_m)


def prebf_snr(distance_m: float, link: LinkBudget) -> float:
    """Linear SNR at the destination from a single radio at ``distance_m``."""
    if distance_m <= 0.0:
        raise ValueError("distance must be > 0 m")
    k = link.path_loss_exponent
    if link.path_loss_model is PathLossModel.LOG_DISTANCE_POWER:
        path_db = _fspl_1m_db(link) + 10.0 * k * math.log10(distance_m)
        return db_to_linear(link.tx_power_dbm - path_db - noise_power_dbm(link))
    amp = link.wavelength_m / (2.0 * math.pi) * distance_m**k
    p_mw = db_to_linear(link.tx_power_dbm)
    n_mw = db_to_linear(noise_power_dbm(link))
    return p_mw / (amp * amp * n_mw)


def distance_from_snr(snr: float, link: LinkBudget) -> float:
    """Exact inverse of :func:`prebf_snr` under the configured model."""
    if snr <= 0.0:
        raise ValueError("snr must be > 0")
    k = link.path_loss_exponent
    if link.path_loss_model is PathLossModel.LOG_DISTANCE_POWER:
        path_db = link.tx_power_dbm - noise_power_dbm(link) - linear_to_db(snr)
        return 10.0 ** ((path_db - _fspl_1m_db(link)) / (10.0 * k))
    p_mw = db_to_linear(link.tx_power_dbm)
    n_mw = db_to_linear(noise_power_dbm(link))
    amp = math.sqrt(p_mw / (snr * n_mw))
    return (amp * 2.0 * math.pi / link.wavelength_m) ** (1.0 / k)


def downlink_snr(prebf_snr_linear: float, link: LinkBudget) -> float:
    """SNR of destination-transmitted signals at a DBF radio.

    The destination's extra transmit power lifts the downlink by
    ``dest_power_delta_db`` over the uplink pre-BF SNR.
    """
    return prebf_snr_linear * db_to_linear(link.dest_power_delta_db)
