"""Scenario files: strict JSON describing the whole laser -> OPO -> bench chain.

Any numeric leaf may be written either bare or as ``{"value": x, "source": "..."}``
so that shipped scenarios can document where each number comes from.
Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import json
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError, PhysicsError

NUM = "number"
INT = "integer"
STR = "string"
BOOL = "boolean"
NUMLIST = "number list"

SCHEMA = {
    "metadata": {"title": STR, "seed": INT, "description": STR},
    "laser": {
        "threshold_pump_w": NUM,
        "slope_efficiency": NUM,
        "round_trip_loss": NUM,
        "absorption_per_cm": NUM,
        "rod_length_cm": NUM,
        "emission_cross_section_cm2": NUM,
        "pump_w": NUMLIST,
        "calibration_point": NUMLIST,
    },
    "ring_cavity": {
        "wavelength_m": NUM,
        "m2": NUM,
        "roc_m": NUM,
        "concave_separation_m": NUM,
        "plane_separation_m": NUM,
        "total_length_m": NUM,
        "incidence_angle_rad": NUM,
        "thermal_k_wm": NUM,
        "absorbed_pump_w": NUM,
        "match_beam": {"waist_m": NUM, "waist_offset_m": NUM, "plane": STR},
    },
    "opo": {
        "t1": NUM,
        "t2_pump": NUM,
        "l_diss": NUM,
        "pump_loss": NUM,
        "crystal_length_m": NUM,
        "crystal_index": NUM,
        "air_gap_m": NUM,
        "signal_wavelength_m": NUM,
        "idler_wavelength_m": NUM,
        "pump_wavelength_m": NUM,
        "p_threshold_w": NUM,
        "pump_w": NUM,
        "analysis_frequency_hz": NUM,
        "reported": {
            "escape_efficiency": NUM,
            "theoretical_squeezing_db": NUM,
            "bandwidth_hz": NUM,
            "measured_squeezing_db": NUM,
            "inferred_squeezing_db": NUM,
            "measurement_efficiency": NUM,
            "conversion": NUM,
        },
    },
    "detection": {
        "quantum_efficiency": NUM,
        "path_transmission": NUM,
        "electronic_floor_db": NUM,
        "cmrr_db": NUM,
        "saturation_w": NUM,
    },
    "lock": {
        "modulation_hz": NUM,
        "modulation_depth_rad": NUM,
        "back_transmission": NUM,
        "kp": NUM,
        "ki": NUM,
        "kd": NUM,
        "sample_period_s": NUM,
        "output_limit_hz": NUM,
        "drift_rate_hz_per_s": NUM,
        "white_noise_rms_hz": NUM,
        "initial_detuning_hz": NUM,
        "duration_s": NUM,
        "settle_window_s": NUM,
    },
    "bench": {
        "sample_rate_hz": NUM,
        "n_samples": INT,
        "rbw_hz": NUM,
        "vbw_hz": NUM,
        "f_stop_hz": NUM,
        "band_hz": NUMLIST,
        "analysis_frequency_hz": NUM,
        "excess_common_db": NUM,
        "include_cmrr_leakage": BOOL,
        "technical_noise": {"level": NUM, "min_at_hz": NUM, "corner_hz": NUM, "order": NUM},
    },
}

REQUIRED = {
    "laser": ("threshold_pump_w", "slope_efficiency"),
    "ring_cavity": ("wavelength_m", "roc_m", "concave_separation_m", "plane_separation_m", "total_length_m"),
    "opo": (
        "t1", "t2_pump", "l_diss", "crystal_length_m", "air_gap_m",
        "signal_wavelength_m", "idler_wavelength_m",
    ),
    "match_beam": ("waist_m",),
    "technical_noise": ("corner_hz", "order"),
}

SHIPPED = {"paper_fig1": "paper_fig1.json"}


def _is_wrapped(v):
    return isinstance(v, dict) and "value" in v and set(v) <= {"value", "source"}


def unwrap(v):
    return v["value"] if _is_wrapped(v) else v


def _check_leaf(v, kind, path):
    v = unwrap(v)
    if kind == NUM:
        ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    elif kind == INT:
        ok = isinstance(v, int) and not isinstance(v, bool)
    elif kind == STR:
        ok = isinstance(v, str)
    elif kind == BOOL:
        ok = isinstance(v, bool)
    else:
        ok = isinstance(v, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in v
        )
    if not ok:
        raise ConfigError(f"expected {kind}, got {v!r}", path)


def _validate(node, schema, path):
    if not isinstance(node, dict):
        raise ConfigError("expected an object", path or "<root>")
    for key, value in node.items():
        sub = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError("unknown key", sub)
        kind = schema[key]
        if isinstance(kind, dict):
            _validate(value, kind, sub)
            for req in REQUIRED.get(key, ()):
                if req not in value:
                    raise ConfigError("missing required key", f"{sub}.{req}")
        else:
            if _is_wrapped(value) and not isinstance(value.get("source", ""), str):
                raise ConfigError("source must be a string", sub)
            _check_leaf(value, kind, sub)


@dataclass
class Scenario:
    data: dict

    def __post_init__(self):
        _validate(self.data, SCHEMA, "")

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls(data)

    @classmethod
    def load(cls, path_or_name) -> "Scenario":
        name = str(path_or_name)
        if name in SHIPPED and not os.path.exists(name):
            text = resources.files("twinbeam.data").joinpath(SHIPPED[name]).read_text()
            return cls.from_json(text)
        try:
            with open(name) as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read scenario: {exc.strerror}", name) from None

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def has(self, section):
        return section in self.data

    def section(self, name) -> dict:
        if name not in self.data:
            raise ConfigError("missing section", name)
        for req in REQUIRED.get(name, ()):
            if req not in self.data[name]:
                raise ConfigError("missing required key", f"{name}.{req}")
        return self.data[name]

    def get(self, path, default=None):
        node = self.data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return unwrap(node)

    def require(self, path):
        v = self.get(path)
        if v is None:
            raise ConfigError("missing required key", path)
        return v

    def with_value(self, path, value) -> "Scenario":
        """Copy with one numeric leaf replaced (source annotation kept)."""
        data = copy.deepcopy(self.data)
        parts = path.split(".")
        schema = SCHEMA
        node = data
        for part in parts[:-1]:
            if part not in schema or not isinstance(schema[part], dict):
                raise ConfigError("not a section", path)
            schema = schema[part]
            node = node.setdefault(part, {})
        leaf = parts[-1]
        if schema.get(leaf) not in (NUM, INT):
            raise ConfigError("sweep target must be a numeric leaf", path)
        if _is_wrapped(node.get(leaf)):
            node[leaf] = {**node[leaf], "value": value}
        else:
            node[leaf] = value
        return Scenario(data)

    @property
    def seed(self):
        env = os.environ.get("TWINBEAM_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"TWINBEAM_SEED must be an integer, got {env!r}") from None
        return int(self.get("metadata.seed", 0))


@contextmanager
def physics(section):
    """Prefix physics invariant failures with the offending section."""
    try:
        yield
    except PhysicsError as exc:
        if not getattr(exc, "_tagged", False):
            exc.args = (f"{section}: {exc}",)
            exc._tagged = True
        raise
