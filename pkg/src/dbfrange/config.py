"""JSON run configuration: schema, defaults and strict validation.

An empty config file (or ``{}``) yields the reference scenario: six
radios, a 1000-sample overhead budget, 15 dB extra destination power,
8000-sample payload evaluated 5000 samples after frequency correction,
a 5 dB post-BF SNR requirement met with probability 0.9, path-loss
exponent 2.3, 0 dBm radios with a 3 dB noise figure in 1 MHz.

Unknown keys are rejected by name; constraint violations name the field.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .link_budget import LinkBudget, PathLossModel
from .variance import ProtocolConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "snr_grid"]


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


_LINK_FIELDS = {
    "tx_power_dbm": float,
    "dest_power_delta_db": float,
    "noise_figure_db": float,
    "noise_bandwidth_hz": float,
    "wavelength_m": float,
    "path_loss_exponent": float,
    "path_loss_model": str,
}

_PROTOCOL_FIELDS = {
    "n_radios": int,
    "overhead_budget": int,
    "zc_repeats": int,
    "zc_length": int,
    "phase_preamble": int,
    "feedback_preamble": int,
    "guard1": int,
    "guard2": int,
    "guard3": int,
    "payload_len": int,
    "sample_time_s": float,
    "eval_time_s": float,
    "kf_process_var": float,
}

_SOLVER_FIELDS = {
    "gamma_req_db": float,
    "p_min": float,
    "grid_min_db": float,
    "grid_max_db": float,
    "grid_step_db": float,
}

_SWEEP_FIELDS = {
    "n_radios": list,
    "overhead_budget": list,
    "dest_power_delta_db": list,
}


@dataclass(frozen=True)
class RunConfig:
    link: LinkBudget = field(default_factory=LinkBudget)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    gamma_req_db: float = 5.0
    p_min: float = 0.9
    grid_min_db: float = -30.0
    grid_max_db: float = 30.0
    grid_step_db: float = 0.25
    sweep_n_radios: tuple[int, ...] = (2, 4, 8, 16)
    sweep_overhead_budget: tuple[int, ...] = (500, 1000, 2000)
    sweep_dest_power_delta_db: tuple[float, ...] = (5.0, 15.0, 25.0)
    seed: int = 12345
    output_dir: str = "out"


def _check_keys(section: str, data: dict, allowed) -> None:
    for key in data:
        if key not in allowed:
            where = f"{section}.{key}" if section else key
            raise ConfigError(f"unknown config key: {where!r}")


def _coerce(section: str, name: str, value, kind):
    label = f"{section}.{name}" if section else name
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{label}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{label}: expected an integer, got {value!r}")
        return int(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{label}: expected a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{label}: expected a nonempty list, got {value!r}")
        return list(value)
    raise AssertionError(kind)


def _build_section(section: str, data: dict, fields: dict, defaults) -> dict:
    _check_keys(section, data, fields)
    out = {}
    for name, kind in fields.items():
        if name in data:
            out[name] = _coerce(section, name, data[name], kind)
        else:
            out[name] = getattr(defaults, name)
    return out


def from_dict(raw: dict) -> RunConfig:
    """Validate a raw mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    _check_keys("", raw, {"link", "protocol", "solver", "sweep", "seed", "output_dir"})
    defaults = RunConfig()

    link_kw = _build_section("link", raw.get("link", {}), _LINK_FIELDS, defaults.link)
    model_name = link_kw.pop("path_loss_model")
    if isinstance(model_name, PathLossModel):
        model = model_name
    else:
        try:
            model = PathLossModel(model_name)
        except ValueError:
            choices = ", ".join(m.value for m in PathLossModel)
            raise ConfigError(
                f"link.path_loss_model: must be one of {choices}, got {model_name!r}"
            ) from None
    proto_kw = _build_section(
        "protocol", raw.get("protocol", {}), _PROTOCOL_FIELDS, defaults.protocol
    )
    try:
        link = LinkBudget(path_loss_model=model, **link_kw)
        protocol = ProtocolConfig(**proto_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    solver_raw = raw.get("solver", {})
    _check_keys("solver", solver_raw, _SOLVER_FIELDS)
    solver = {
        name: _coerce("solver", name, solver_raw[name], kind)
        if name in solver_raw
        else getattr(defaults, name)
        for name, kind in _SOLVER_FIELDS.items()
    }
    if not 0.0 < solver["p_min"] < 1.0:
        raise ConfigError("solver.p_min: must be in (0, 1)")
    if solver["grid_step_db"] <= 0.0:
        raise ConfigError("solver.grid_step_db: must be > 0")
    if solver["grid_min_db"] >= solver["grid_max_db"]:
        raise ConfigError("solver.grid_min_db: must be below grid_max_db")

    sweep_raw = raw.get("sweep", {})
    _check_keys("sweep", sweep_raw, _SWEEP_FIELDS)
    sweep_kw = {}
    for name, dest, kind in (
        ("n_radios", "sweep_n_radios", int),
        ("overhead_budget", "sweep_overhead_budget", int),
        ("dest_power_delta_db", "sweep_dest_power_delta_db", float),
    ):
        if name in sweep_raw:
            values = _coerce("sweep", name, sweep_raw[name], list)
            sweep_kw[dest] = tuple(
                _coerce("sweep", f"{name}[{i}]", v, kind) for i, v in enumerate(values)
            )
        else:
            sweep_kw[dest] = getattr(defaults, dest)

    seed = _coerce("", "seed", raw.get("seed", defaults.seed), int)
    output_dir = _coerce("", "output_dir", raw.get("output_dir", defaults.output_dir), str)

    return RunConfig(
        link=link,
        protocol=protocol,
        **solver,
        **sweep_kw,
        seed=seed,
        output_dir=output_dir,
    )


def parse_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return from_dict(raw)


def snr_grid(config: RunConfig) -> np.ndarray:
    """The solver's pre-BF SNR grid in dB."""
    return np.arange(
        config.grid_min_db,
        config.grid_max_db + 0.5 * config.grid_step_db,
        config.grid_step_db,
    )


def config_to_dict(config: RunConfig) -> dict:
    """Round-trippable plain-dict form of a config (for provenance dumps)."""
    return {
        "link": {
            **{
                f.name: getattr(config.link, f.name)
                for f in dataclasses.fields(config.link)
                if f.name != "path_loss_model"
            },
            "path_loss_model": config.link.path_loss_model.value,
        },
        "protocol": dataclasses.asdict(config.protocol),
        "solver": {
            "gamma_req_db": config.gamma_req_db,
            "p_min": config.p_min,
            "grid_min_db": config.grid_min_db,
            "grid_max_db": config.grid_max_db,
            "grid_step_db": config.grid_step_db,
        },
        "sweep": {
            "n_radios": list(config.sweep_n_radios),
            "overhead_budget": list(config.sweep_overhead_budget),
            "dest_power_delta_db": list(config.sweep_dest_power_delta_db),
        },
        "seed": config.seed,
        "output_dir": config.output_dir,
    }
