"""JSON schemas for the command-line runner.

Every command's configuration is validated against a published schema and
every tunable has its default spelled out here, so a config file only needs
the fields it overrides and an archived summary always shows the full
resolved configuration.  `apply_defaults` fills the defaults into a config
dict (recursively for nested blocks) before validation.
"""

from __future__ import annotations

import copy
import math
from typing import Optional

import jsonschema

__all__ = ["COMMAND_SCHEMAS", "ConfigError", "apply_defaults", "resolve_config"]


class ConfigError(ValueError):
    """Configuration rejected by the schema (or unknown command)."""


def _grid_block(n: int, L: float, d: int = 1) -> dict:
    return {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "d": {"type": "integer", "minimum": 1, "maximum": 3, "default": d},
            "n": {"type": "integer", "minimum": 8, "default": n},
            "L": {"type": "number", "exclusiveMinimum": 0, "default": L},
        },
        "default": {},
    }


_BUMP_BLOCK = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "center": {"type": ["number", "array"], "items": {"type": "number"},
                   "default": 0.0},
        "width": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "amplitude": {"type": "number", "default": 1.0},
    },
    "default": {},
}

_FIELD_BLOCK = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["zero", "gaussian", "fourier_bump", "plane_wave", "sum"],
                 "default": "gaussian"},
        "center": {"type": ["number", "array"], "items": {"type": "number"},
                   "default": 0.0},
        "width": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "amplitude": {"type": "number", "default": 1.0},
        "modulation": {"type": ["number", "array"], "items": {"type": "number"},
                       "default": 0.0},
        "frequency": {"type": ["number", "array"], "items": {"type": "number"},
                      "default": 0.0},
        "bumps": {"type": "array", "items": _BUMP_BLOCK, "default": []},
    },
    "default": {},
}

_SEED = {"type": "integer", "minimum": 0, "default": 0}
_C_OVERRIDE = {"type": ["number", "null"], "exclusiveMinimum": 0, "default": None}


def _small_field_block(amplitude: float) -> dict:
    block = copy.deepcopy(_FIELD_BLOCK)
    block["properties"]["amplitude"]["default"] = amplitude
    return block

COMMAND_SCHEMAS = {
    "decompose": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=512, L=8 * math.pi),
            "alphas": {"type": "array", "minItems": 1,
                       "items": {"type": "number", "minimum": 0,
                                 "exclusiveMaximum": 1},
                       "default": [0.0, 0.3, 0.5, 0.8]},
            "C": _C_OVERRIDE,
            "dyadic_tolerance": {"type": "number", "exclusiveMinimum": 0,
                                 "default": 1e-14},
            "alpha_tolerance": {"type": "number", "exclusiveMinimum": 0,
                                "default": 1e-12},
            "seed": _SEED,
        },
    },
    "norm": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=1024, L=16 * math.pi),
            "field": _FIELD_BLOCK,
            "s": {"type": "number", "default": 0.0},
            "alpha": {"type": "number", "minimum": 0, "exclusiveMaximum": 1,
                      "default": 0.0},
            "C": _C_OVERRIDE,
            "seed": _SEED,
        },
    },
    "evolve": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=1024, L=8 * math.pi),
            "field": _FIELD_BLOCK,
            "lam": {"type": "number", "default": 1.0},
            "kappa": {"type": "integer", "minimum": 1, "default": 1},
            "dt": {"type": "number", "exclusiveMinimum": 0, "default": 1e-3},
            "t_end": {"type": "number", "minimum": 0, "default": 0.1},
            "dealias": {"type": "boolean", "default": False},
            "snapshot_stride": {"type": "integer", "minimum": 1, "default": 1},
            "mass_tolerance": {"type": "number", "exclusiveMinimum": 0,
                               "default": 1e-10},
            "save_final": {"type": "boolean", "default": True},
            "seed": _SEED,
        },
    },
    "strichartz": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "alpha": {"type": "number", "minimum": 0, "exclusiveMaximum": 1,
                      "default": 0.5},
            "q": {"type": "number", "default": 8.0},
            "r": {"type": "number", "default": 4.0},
            "k_values": {"type": "array", "minItems": 5,
                         "items": {"type": "integer", "minimum": 1},
                         "default": [1, 2, 4, 8, 16, 32]},
            "d": {"type": "integer", "minimum": 1, "maximum": 1, "default": 1},
            "C": _C_OVERRIDE,
            "width_fraction": {"type": "number", "exclusiveMinimum": 0,
                               "default": 0.25},
            "T0": {"type": "number", "exclusiveMinimum": 0, "default": 64.0},
            "n": {"type": "integer", "minimum": 64, "default": 2048},
            "safety": {"type": "number", "exclusiveMinimum": 0,
                       "exclusiveMaximum": 1, "default": 0.45},
            "rtol": {"type": "number", "exclusiveMinimum": 0, "default": 5e-3},
            "tolerance": {"type": "number", "exclusiveMinimum": 0,
                          "default": 0.15},
            "seed": _SEED,
        },
    },
    "bilinear": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "separations": {"type": "array", "minItems": 5,
                            "items": {"type": "number", "exclusiveMinimum": 0},
                            "default": [12.0, 24.0, 48.0, 96.0, 192.0]},
            "width": {"type": "number", "exclusiveMinimum": 0, "default": 0.5},
            "d": {"type": "integer", "minimum": 1, "maximum": 3, "default": 1},
            "n": {"type": ["integer", "null"], "minimum": 64, "default": None},
            "conj1": {"type": "boolean", "default": False},
            "conj2": {"type": "boolean", "default": False},
            "tolerance": {"type": "number", "exclusiveMinimum": 0,
                          "default": 0.1},
            "compare_oracle": {"type": "boolean", "default": True},
            "seed": _SEED,
        },
    },
    "construct": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=131072, L=16 * math.pi),
            "eps": {"type": "number", "exclusiveMinimum": 0, "default": 0.5},
            "alpha": {"type": "number", "minimum": 0, "exclusiveMaximum": 1,
                      "default": 0.5},
            "kappa": {"type": "integer", "minimum": 1, "default": 3},
            "d": {"type": "integer", "minimum": 1, "default": 1},
            "s": {"type": "number", "default": 0.12},
            "J": {"type": "integer", "minimum": 1, "default": 1},
            "n_pieces": {"type": "integer", "minimum": 4, "default": 8},
            "c": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5,
                  "default": 0.125},
            "sigmas": {"type": "array", "minItems": 4,
                       "items": {"type": "number", "minimum": 1},
                       "default": [16.0, 32.0, 64.0, 128.0, 256.0]},
            "refine_base_n": {"type": "integer", "minimum": 64,
                              "default": 8192},
            "refine_levels": {"type": "integer", "minimum": 2, "default": 5},
            "C": _C_OVERRIDE,
            "seed": _SEED,
        },
    },
    "inflate": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=8192, L=8 * math.pi),
            "s": {"type": "number", "default": -0.1},
            "alpha": {"type": "number", "minimum": 0, "exclusiveMaximum": 1,
                      "default": 0.0},
            "kappa": {"type": "integer", "minimum": 1, "default": 1},
            "d": {"type": "integer", "minimum": 1, "default": 1},
            "N_values": {"type": "array", "minItems": 4,
                         "items": {"type": "integer", "minimum": 8},
                         "default": [8, 16, 32, 64, 128]},
            "time_constant": {"type": "number", "exclusiveMinimum": 0,
                              "default": 1.0},
            "tolerance": {"type": "number", "exclusiveMinimum": 0,
                          "default": 0.15},
            "expect": {"enum": ["growth", "control", None], "default": None},
            "C": _C_OVERRIDE,
            "seed": _SEED,
        },
    },
    "picard": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "grid": _grid_block(n=512, L=4 * math.pi),
            # Default to small data: the iteration must land inside the
            # contraction ball for the expect=contract preset to hold.
            "field": _small_field_block(amplitude=1e-3),
            "lam": {"type": "number", "default": 1.0},
            "kappa": {"type": "integer", "minimum": 1, "default": 1},
            "t_end": {"type": "number", "exclusiveMinimum": 0, "default": 0.5},
            "s": {"type": "number", "default": 0.2},
            "alpha": {"type": "number", "minimum": 0, "exclusiveMaximum": 1,
                      "default": 0.0},
            "n_time": {"type": "integer", "minimum": 3, "default": 33},
            "max_iter": {"type": "integer", "minimum": 1, "default": 8},
            "threshold": {"type": "number", "exclusiveMinimum": 0,
                          "default": 1e-2},
            "contraction_within": {"type": "integer", "minimum": 1,
                                   "default": 4},
            "expect": {"enum": ["contract", "fail"], "default": "contract"},
            "C": _C_OVERRIDE,
            "seed": _SEED,
        },
    },
    "glassey": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n": {"type": "integer", "minimum": 64, "default": 2048},
            "L": {"type": "number", "exclusiveMinimum": 0,
                  "default": 8 * math.pi},
            "amplitude": {"type": "number", "exclusiveMinimum": 0,
                          "default": 1.5},
            "chirp": {"type": "number", "default": 0.5},
            "kappa": {"type": "integer", "minimum": 1, "default": 3},
            "dt": {"type": "number", "exclusiveMinimum": 0, "default": 1e-4},
            "t_end": {"type": "number", "exclusiveMinimum": 0, "default": 0.2},
            "growth_target": {"type": "number", "exclusiveMinimum": 0,
                              "default": 10.0},
            "seed": _SEED,
        },
    },
}


def apply_defaults(schema: dict, config) -> object:
    """Return a copy of config with schema defaults filled in recursively.

    Only object properties are walked (array items are taken as given); a
    missing property whose subschema carries a default gets a deep copy of
    that default, and object-valued defaults are then walked themselves so
    nested blocks fill up even when absent entirely.
    """
    if schema.get("type") == "object" and isinstance(config, dict):
        out = dict(config)
        for key, sub in schema.get("properties", {}).items():
            if key not in out:
                if "default" in sub:
                    out[key] = copy.deepcopy(sub["default"])
                else:
                    continue
            out[key] = apply_defaults(sub, out[key])
        return out
    return config


def resolve_config(command: str, config: Optional[dict]) -> dict:
    """Fill defaults and validate; raises ConfigError with the failure path."""
    if command not in COMMAND_SCHEMAS:
        raise ConfigError(f"unknown command {command!r}; valid commands: "
                          + ", ".join(sorted(COMMAND_SCHEMAS)))
    schema = COMMAND_SCHEMAS[command]
    resolved = apply_defaults(schema, {} if config is None else config)
    try:
        jsonschema.validate(resolved, schema)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {err.message}") from err
    return resolved
