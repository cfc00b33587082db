"""Mission configuration files: published units in, SI out.

Configs are JSON documents with up to six sections — ``radar``, ``comm``,
``energy``, ``mission``, ``deviation``, ``solver`` — whose keys mirror the
parameter records in :mod:`sarplan.params`.  Dimensioned values are written
the way datasheets publish them (``"46 dBm"``, ``"19.44 Wh"``, ``"2 GHz"``)
and must carry their unit; plain numbers are reserved for dimensionless
fields (counts, ratios in linear scale, probabilities).  Unknown keys are
rejected with their full path so a typo cannot silently fall back to a
default.

Every omitted field takes its reference-mission default, and the fully
normalized SI document — defaults included — is what gets echoed into
``report.json`` and hashed into the config fingerprint, so two configs are
interchangeable exactly when their normalized forms match byte for byte.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .params import (
    CommParams,
    EnergyParams,
    MissionParams,
    Params,
    RadarParams,
)
from .robust import DeviationModel
from .subproblem import SCHEMES

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A config file problem, message prefixed with the offending field path."""


# ----------------------------------------------------------------------
# Quantity parsing
# ----------------------------------------------------------------------

def _db(offset_db: float) -> Callable[[float], float]:
    return lambda v: 10.0 ** ((v + offset_db) / 10.0)


def _scale(factor: float) -> Callable[[float], float]:
    return lambda v: v * factor


_UNITS: dict[str, dict[str, Callable[[float], float]]] = {
    "power": {"W": _scale(1.0), "mW": _scale(1e-3), "kW": _scale(1e3),
              "dBm": _db(-30.0), "dBW": _db(0.0)},
    "energy": {"J": _scale(1.0), "kJ": _scale(1e3), "Wh": _scale(3600.0),
               "mWh": _scale(3.6), "kWh": _scale(3.6e6)},
    "length": {"m": _scale(1.0), "cm": _scale(1e-2), "mm": _scale(1e-3),
               "km": _scale(1e3)},
    "time": {"s": _scale(1.0), "ms": _scale(1e-3), "us": _scale(1e-6),
             "ns": _scale(1e-9)},
    "frequency": {"Hz": _scale(1.0), "kHz": _scale(1e3), "MHz": _scale(1e6),
                  "GHz": _scale(1e9)},
    "rate": {"bit/s": _scale(1.0), "kbit/s": _scale(1e3),
             "Mbit/s": _scale(1e6), "Gbit/s": _scale(1e9),
             "bit": _scale(1.0), "kbit": _scale(1e3), "Mbit": _scale(1e6)},
    "angle": {"deg": _scale(1.0), "rad": _scale(180.0 / math.pi)},
    "speed": {"m/s": _scale(1.0), "km/h": _scale(1.0 / 3.6)},
    "weight": {"N": _scale(1.0)},
    "density": {"kg/m^3": _scale(1.0)},
    "area": {"m^2": _scale(1.0)},
    "sensing": {"m^3/W": _scale(1.0)},
}


def parse_quantity(raw: Any, dimension: str, path: str) -> float:
    """SI value of a ``"number unit"`` string for the given dimension.

    ``"ratio"`` fields additionally accept plain numbers (linear scale) or
    ``"x dB"``; every other dimension requires an explicit unit suffix.
    """
    if dimension == "ratio":
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw)
        table: dict[str, Callable[[float], float]] = {"dB": _db(0.0)}
    else:
        table = _UNITS[dimension]
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            units = ", ".join(sorted(table))
            raise ConfigError(
                f"{path}: dimensioned field requires a unit suffix "
                f"(one of: {units})")
    if not isinstance(raw, str):
        raise ConfigError(f"{path}: expected a 'number unit' string")
    parts = raw.strip().rsplit(None, 1)
    if len(parts) != 2:
        raise ConfigError(f"{path}: expected a 'number unit' string, got {raw!r}")
    text, unit = parts
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{path}: {text!r} is not a number") from None
    if unit not in table:
        units = ", ".join(sorted(table))
        raise ConfigError(f"{path}: unknown unit {unit!r} (expected one of: {units})")
    return table[unit](value)


def _plain_number(raw: Any, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: expected a plain number")
    return float(raw)


def _integer(raw: Any, path: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{path}: expected an integer")
    return raw


def _position(raw: Any, path: str) -> tuple[float, float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ConfigError(f"{path}: expected [x, y, z] in meters")
    out = []
    for i, item in enumerate(raw):
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(float(item))
        elif isinstance(item, str):
            out.append(parse_quantity(item, "length", f"{path}[{i}]"))
        else:
            raise ConfigError(f"{path}[{i}]: expected a number (meters)")
    return tuple(out)


# ----------------------------------------------------------------------
# Section schemas: config key -> (kind, dataclass field)
# ----------------------------------------------------------------------

_SECTIONS: dict[str, dict[str, tuple[str, str]]] = {
    "radar": {
        "depression_angle": ("angle", "depression_angle_deg"),
        "beamwidth": ("angle", "beamwidth_deg"),
        "pulse_duration": ("time", "pulse_duration_s"),
        "prf": ("frequency", "prf_hz"),
        "bandwidth": ("frequency", "bandwidth_hz"),
        "center_frequency": ("frequency", "center_frequency_hz"),
        "snr_min": ("ratio", "snr_min_linear"),
        "p_sar_max": ("power", "sar_power_max_w"),
        "beta": ("sensing", "beta_w_inv_m3"),
    },
    "comm": {
        "bandwidth": ("frequency", "bandwidth_hz"),
        "channel_gain": ("ratio", "gamma_linear"),
        "p_com_max": ("power", "com_power_max_w"),
        "sync_rate": ("rate", "sync_rate_bps"),
        "gs_position": ("position", "gs_position_m"),
    },
    "energy": {
        "q_start": ("energy", "battery_j"),
        "cruise_power": ("power", "cruise_power_w"),
        "blade_power": ("power", "blade_power_w"),
        "induced_power": ("power", "induced_power_w"),
        "tip_speed": ("speed", "tip_speed_mps"),
        "fuselage_drag_ratio": ("number", "fuselage_drag_ratio"),
        "air_density": ("density", "air_density_kgm3"),
        "rotor_solidity": ("number", "rotor_solidity"),
        "rotor_disc_area": ("area", "rotor_disc_area_m2"),
        "uav_weight": ("weight", "uav_weight_n"),
    },
    "mission": {
        "aoi_length": ("length", "aoi_length_m"),
        "slots_per_scan": ("int", "slots_per_scan"),
        "velocity": ("speed", "velocity_mps"),
        "z_min": ("length", "z_min_m"),
        "z_max": ("length", "z_max_m"),
    },
    "deviation": {
        "offset_x": ("length", "offset_x_m"),
        "offset_z": ("length", "offset_z_m"),
        "sigma": ("length", "sigma_m"),
        "reliability": ("number", "reliability"),
    },
    "solver": {
        "tolerance": ("number", "tolerance"),
        "max_iterations": ("int", "max_iterations"),
        "scheme": ("str", "scheme"),
        "solver_max_iter": ("int", "solver_max_iter"),
        "runs": ("int", "runs"),
        "bound_epsilon_m2": ("optional_number", "bound_epsilon_m2"),
    },
}

_SECTION_TYPES = {"radar": RadarParams, "comm": CommParams,
                  "energy": EnergyParams, "mission": MissionParams}


def _convert(raw: Any, kind: str, path: str) -> Any:
    if kind == "number":
        return _plain_number(raw, path)
    if kind == "int":
        return _integer(raw, path)
    if kind == "str":
        if not isinstance(raw, str):
            raise ConfigError(f"{path}: expected a string")
        return raw
    if kind == "optional_number":
        return None if raw is None else _plain_number(raw, path)
    if kind == "position":
        return _position(raw, path)
    return parse_quantity(raw, kind, path)


# ----------------------------------------------------------------------
# Config containers
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SolverSettings:
    """Algorithm knobs shared by the subcommands.

    ``runs`` is the Monte-Carlo default for ``simulate``/``bench``;
    ``bound_epsilon_m2`` the absolute polyblock gap (None = 1% of the box
    coverage).
    """

    tolerance: float = 1e-3
    max_iterations: int = 50
    scheme: str = "proposed"
    solver_max_iter: int = 500
    runs: int = 10000
    bound_epsilon_m2: Optional[float] = None

    def __post_init__(self) -> None:
        if self.tolerance <= 0.0:
            raise ValueError("solver.tolerance must be positive")
        if self.max_iterations < 1 or self.solver_max_iter < 1:
            raise ValueError("iteration limits must be at least 1")
        if self.scheme not in SCHEMES:
            raise ValueError(
                f"solver.scheme must be one of {sorted(SCHEMES)}, got {self.scheme!r}")
        if self.runs < 1:
            raise ValueError("solver.runs must be at least 1")
        if self.bound_epsilon_m2 is not None and self.bound_epsilon_m2 <= 0.0:
            raise ValueError("solver.bound_epsilon_m2 must be positive")


@dataclass(frozen=True)
class MissionConfig:
    """A fully validated, SI-normalized mission description."""

    params: Params
    dev: DeviationModel
    solver: SolverSettings

    def normalized(self) -> dict:
        """Nested SI dict (defaults included) — the canonical echo form."""
        p = self.params
        doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        for section, record in (("radar", p.radar), ("comm", p.comm),
                                ("energy", p.energy), ("mission", p.mission),
                                ("deviation", self.dev),
                                ("solver", self.solver)):
            fields = {}
            for _, attr in _SECTIONS[section].values():
                value = getattr(record, attr)
                fields[attr] = list(value) if isinstance(value, tuple) else value
            doc[section] = fields
        return doc

    def fingerprint(self) -> str:
        """SHA-256 over the canonical JSON of :meth:`normalized`."""
        canon = json.dumps(self.normalized(), sort_keys=True,
                           separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ----------------------------------------------------------------------
# Parsing and loading
# ----------------------------------------------------------------------

def parse_config(doc: Any, source: str = "<config>") -> MissionConfig:
    """Validate a decoded JSON document and normalize it to SI records."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"{source}: unsupported schema_version {version!r} "
            f"(this build reads {SCHEMA_VERSION})")

    for key in doc:
        if key != "schema_version" and key not in _SECTIONS:
            raise ConfigError(
                f"{source}: unknown section {key!r} "
                f"(expected: {', '.join(_SECTIONS)})")

    converted: dict[str, dict[str, Any]] = {}
    for section, schema in _SECTIONS.items():
        body = doc.get(section, {})
        if not isinstance(body, dict):
            raise ConfigError(f"{section}: must be an object")
        fields: dict[str, Any] = {}
        for key, raw in body.items():
            if key not in schema:
                raise ConfigError(
                    f"{section}.{key}: unknown key "
                    f"(expected: {', '.join(schema)})")
            kind, attr = schema[key]
            fields[attr] = _convert(raw, kind, f"{section}.{key}")
        converted[section] = fields

    def build(factory, section):
        try:
            return factory(**converted[section])
        except ValueError as exc:
            raise ConfigError(f"{section}: {exc}") from None

    params = Params(radar=build(RadarParams, "radar"),
                    comm=build(CommParams, "comm"),
                    energy=build(EnergyParams, "energy"),
                    mission=build(MissionParams, "mission"))
    dev = build(DeviationModel, "deviation")
    solver = build(SolverSettings, "solver")
    return MissionConfig(params=params, dev=dev, solver=solver)


def load_config(path: Optional[str]) -> MissionConfig:
    """Read, decode, and normalize a config file; None means all defaults."""
    if path is None:
        return parse_config({}, "<defaults>")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return parse_config(doc, path)


def with_overrides(cfg: MissionConfig, reliability: Optional[float] = None,
                   scheme: Optional[str] = None) -> MissionConfig:
    """Config with command-line overrides applied (validation re-runs)."""
    dev, solver = cfg.dev, cfg.solver
    try:
        if reliability is not None:
            dev = dataclasses.replace(dev, reliability=reliability)
        if scheme is not None:
            solver = dataclasses.replace(solver, scheme=scheme)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return MissionConfig(params=cfg.params, dev=dev, solver=solver)
