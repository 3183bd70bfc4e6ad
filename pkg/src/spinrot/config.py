"""Unit-aware configuration parsing.

The instrument mixes gauss, kilohertz and angstrom in its natural
vocabulary, so the config file requires an explicit unit on every
physical quantity ("9 G", "1.9 angstrom", "2.5 kHz") and normalizes to
SI at parse time. Bare numbers are rejected for unit-carrying fields;
dimensionless fields (contrast, transmissions, counts) stay plain
numbers. Unknown keys are errors, and every error names the offending
field path so a bad file fails loudly and precisely.
"""

import hashlib
import json
import re
from dataclasses import dataclass

import numpy as np
import yaml

from .constants import CODATA
from .experiment import Instrument


class ConfigError(Exception):
    """Invalid configuration; the message starts with the field path."""


_UNITS = {
    "tesla": {"T": 1.0, "mT": 1e-3, "uT": 1e-6, "nT": 1e-9, "G": 1e-4, "mG": 1e-7, "kG": 1e-1},
    "meter": {
        "m": 1.0,
        "cm": 1e-2,
        "mm": 1e-3,
        "um": 1e-6,
        "nm": 1e-9,
        "angstrom": 1e-10,
        "Å": 1e-10,
    },
    "second": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "hertz": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6},
    "radian": {"rad": 1.0, "mrad": 1e-3, "deg": np.pi / 180.0},
    "rate": {"cps": 1.0, "1/s": 1.0, "/s": 1.0},
}

_QUANTITY_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(\S+)\s*$")


def parse_quantity(value, dimension: str, field: str) -> float:
    """Parse '<number> <unit>' into SI units of the given dimension."""
    table = _UNITS[dimension]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        raise ConfigError(
            f"{field}: plain number {value!r} is ambiguous, give a unit "
            f"(one of {', '.join(sorted(table))})"
        )
    if not isinstance(value, str):
        raise ConfigError(f"{field}: expected a '<number> <unit>' string, got {value!r}")
    match = _QUANTITY_RE.match(value)
    if not match:
        raise ConfigError(f"{field}: cannot parse quantity {value!r}")
    number, unit = match.groups()
    if unit not in table:
        raise ConfigError(
            f"{field}: unknown {dimension} unit {unit!r} (one of {', '.join(sorted(table))})"
        )
    return float(number) * table[unit]


def _dimensionless(value, field: str, lo=None, hi=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field}: expected a plain number, got {value!r}")
    x = float(value)
    if lo is not None and x < lo or hi is not None and x > hi:
        raise ConfigError(f"{field}: {x!r} outside allowed range [{lo}, {hi}]")
    return x


def _integer(value, field: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{field}: must be >= {minimum}")
    return value


def _optional_quantity(value, dimension: str, field: str):
    if value is None or (isinstance(value, str) and value.strip() == "auto"):
        return None
    return parse_quantity(value, dimension, field)


@dataclass(frozen=True)
class Acquisition:
    frequencies: tuple
    chi_points: int
    chi_cycles: float
    counting_time: float
    count_rate: float


@dataclass(frozen=True)
class ScanRanges:
    amplitude_points: int
    amplitude_margin: float
    distance_min: float
    distance_max: float
    distance_points: int
    b_loc_min: float
    b_loc_max: float
    b_loc_points: int


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration in SI units."""

    instrument: Instrument
    acquisition: Acquisition
    scans: ScanRanges

    def si_dict(self) -> dict:
        ins, acq, sc = self.instrument, self.acquisition, self.scans
        return {
            "beamline": {
                "wavelength_m": ins.wavelength,
                "guide_field_t": ins.guide_field,
                "rfg_length_m": ins.rfg_length,
                "rfg_path": ins.rfg_path,
                "contrast": ins.contrast,
                "arm_guide_length_m": ins.arm_guide,
                "dc1_rfg_distance_m": ins.dc1_rfg_distance,
                "rfg_dc2_distance_m": ins.rfg_dc2_distance,
                "b_loc_t": ins.b_loc_resolved,
                "precession_mismatch_rad": ins.precession_mismatch,
                "amplitude_imbalance": ins.x_imbalance,
                "rfg_integration_steps": ins.rfg_steps,
                "velocity_m_s": ins.velocity,
                "t1_s": ins.t1,
            },
            "analyzer": {
                "axis": "+y",
                "transmission_pass": ins.analyzer_t_pass,
                "transmission_block": ins.analyzer_t_block,
            },
            "acquisition": {
                "frequencies_hz": list(acq.frequencies),
                "chi_points": acq.chi_points,
                "chi_cycles": acq.chi_cycles,
                "counting_time_s": acq.counting_time,
                "count_rate_cps": acq.count_rate,
            },
            "scans": {
                "amplitude_points": sc.amplitude_points,
                "amplitude_margin": sc.amplitude_margin,
                "distance_min_m": sc.distance_min,
                "distance_max_m": sc.distance_max,
                "distance_points": sc.distance_points,
                "b_loc_min_t": sc.b_loc_min,
                "b_loc_max_t": sc.b_loc_max,
                "b_loc_points": sc.b_loc_points,
            },
            "constants": CODATA.as_dict(),
        }

    def sha256(self) -> str:
        return hashlib.sha256(
            json.dumps(self.si_dict(), sort_keys=True).encode()
        ).hexdigest()


_SECTIONS = {"beamline", "analyzer", "acquisition", "scans"}


def _section(raw: dict, name: str, known: set) -> dict:
    sec = raw.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a mapping")
    for key in sec:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown key")
    return sec


def _frequencies(value) -> tuple:
    if value is None:
        value = {"start": "0 kHz", "stop": "20 kHz", "step": "2.5 kHz"}
    field = "acquisition.frequencies"
    if isinstance(value, dict):
        for key in value:
            if key not in {"start", "stop", "step"}:
                raise ConfigError(f"{field}.{key}: unknown key")
        start = parse_quantity(value.get("start", "0 Hz"), "hertz", field + ".start")
        stop = parse_quantity(value["stop"], "hertz", field + ".stop") if "stop" in value else None
        step = parse_quantity(value["step"], "hertz", field + ".step") if "step" in value else None
        if stop is None or step is None or step <= 0:
            raise ConfigError(f"{field}: range form needs 'stop' and a positive 'step'")
        count = int(round((stop - start) / step)) + 1
        freqs = tuple(start + k * step for k in range(count))
    elif isinstance(value, list):
        if not value:
            raise ConfigError(f"{field}: must not be empty")
        freqs = tuple(parse_quantity(v, "hertz", f"{field}[{k}]") for k, v in enumerate(value))
    else:
        raise ConfigError(f"{field}: expected a list or a start/stop/step mapping")
    if any(f < 0 for f in freqs):
        raise ConfigError(f"{field}: frequencies must be nonnegative")
    if list(freqs) != sorted(set(freqs)):
        raise ConfigError(f"{field}: frequencies must be strictly increasing")
    return freqs


def resolve_config(raw: dict) -> RunConfig:
    """Validate a parsed YAML mapping and normalize everything to SI."""
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping of sections")
    for key in raw:
        if key not in _SECTIONS:
            raise ConfigError(f"{key}: unknown section")

    bl = _section(
        raw,
        "beamline",
        {
            "wavelength",
            "guide_field",
            "rfg_length",
            "rfg_path",
            "contrast",
            "arm_guide_length",
            "dc1_plate_distance",
            "plate_dc2_distance",
            "b_loc",
            "precession_mismatch",
            "amplitude_imbalance",
            "rfg_integration_steps",
        },
    )
    an = _section(raw, "analyzer", {"transmission_pass", "transmission_block"})
    acq = _section(
        raw,
        "acquisition",
        {"frequencies", "chi_points", "chi_cycles", "counting_time", "count_rate"},
    )
    sc = _section(
        raw,
        "scans",
        {
            "amplitude_points",
            "amplitude_margin",
            "distance_min",
            "distance_max",
            "distance_points",
            "b_loc_min",
            "b_loc_max",
            "b_loc_points",
        },
    )

    rfg_path = bl.get("rfg_path", "II")
    if rfg_path not in ("I", "II"):
        raise ConfigError(f"beamline.rfg_path: must be 'I' or 'II', got {rfg_path!r}")

    try:
        instrument = Instrument(
            wavelength=parse_quantity(bl.get("wavelength", "1.9 angstrom"), "meter", "beamline.wavelength"),
            guide_field=parse_quantity(bl.get("guide_field", "9 G"), "tesla", "beamline.guide_field"),
            rfg_length=parse_quantity(bl.get("rfg_length", "0.02 m"), "meter", "beamline.rfg_length"),
            rfg_path=rfg_path,
            arm_guide_length=_optional_quantity(bl.get("arm_guide_length", "auto"), "meter", "beamline.arm_guide_length"),
            dc1_plate_distance=_optional_quantity(bl.get("dc1_plate_distance", "auto"), "meter", "beamline.dc1_plate_distance"),
            plate_dc2_distance=_optional_quantity(bl.get("plate_dc2_distance", "auto"), "meter", "beamline.plate_dc2_distance"),
            b_loc=_optional_quantity(bl.get("b_loc", "auto"), "tesla", "beamline.b_loc"),
            precession_mismatch=(
                0.0
                if "precession_mismatch" not in bl
                else parse_quantity(bl["precession_mismatch"], "radian", "beamline.precession_mismatch")
            ),
            contrast=_dimensionless(bl.get("contrast", 0.75), "beamline.contrast", 0.0, 1.0),
            analyzer_t_pass=_dimensionless(an.get("transmission_pass", 0.4), "analyzer.transmission_pass", 0.0, 1.0),
            analyzer_t_block=_dimensionless(an.get("transmission_block", 0.0), "analyzer.transmission_block", 0.0, 1.0),
            x_imbalance=_dimensionless(bl.get("amplitude_imbalance", 0.0), "beamline.amplitude_imbalance", -0.5, 0.5),
            rfg_steps=_integer(bl.get("rfg_integration_steps", 4096), "beamline.rfg_integration_steps", 16),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"beamline: {exc}") from exc

    acquisition = Acquisition(
        frequencies=_frequencies(acq.get("frequencies")),
        chi_points=_integer(acq.get("chi_points", 16), "acquisition.chi_points", 4),
        chi_cycles=_dimensionless(acq.get("chi_cycles", 2.0), "acquisition.chi_cycles", 1.0, 64.0),
        counting_time=parse_quantity(acq.get("counting_time", "20 s"), "second", "acquisition.counting_time"),
        count_rate=parse_quantity(acq.get("count_rate", "25 cps"), "rate", "acquisition.count_rate"),
    )
    if acquisition.counting_time <= 0:
        raise ConfigError("acquisition.counting_time: must be positive")
    if acquisition.count_rate <= 0:
        raise ConfigError("acquisition.count_rate: must be positive")

    scans = ScanRanges(
        amplitude_points=_integer(sc.get("amplitude_points", 301), "scans.amplitude_points", 11),
        amplitude_margin=_dimensionless(sc.get("amplitude_margin", 1.25), "scans.amplitude_margin", 1.05, 4.0),
        distance_min=parse_quantity(sc.get("distance_min", "2 mm"), "meter", "scans.distance_min"),
        distance_max=parse_quantity(sc.get("distance_max", "0.2 m"), "meter", "scans.distance_max"),
        distance_points=_integer(sc.get("distance_points", 400), "scans.distance_points", 11),
        b_loc_min=parse_quantity(sc.get("b_loc_min", "0 G"), "tesla", "scans.b_loc_min"),
        b_loc_max=parse_quantity(sc.get("b_loc_max", "40 G"), "tesla", "scans.b_loc_max"),
        b_loc_points=_integer(sc.get("b_loc_points", 301), "scans.b_loc_points", 11),
    )
    if scans.distance_min <= 0 or scans.distance_max <= scans.distance_min:
        raise ConfigError("scans.distance_min/distance_max: need 0 < min < max")
    if scans.b_loc_max <= scans.b_loc_min:
        raise ConfigError("scans.b_loc_min/b_loc_max: need min < max")

    return RunConfig(instrument=instrument, acquisition=acquisition, scans=scans)


def load_config(path) -> RunConfig:
    """Read and resolve a YAML config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    return resolve_config(raw)
