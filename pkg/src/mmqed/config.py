"""Run configuration: a nested YAML profile with the fitted device constants
as defaults, strict unknown-key rejection, and dotted-path overrides."""

from __future__ import annotations

import copy
import hashlib
import json

import yaml

from .device import DeviceParams, reference_device
from .transmon import TransmonParams

GRID_KEYS = {"start", "stop", "points"}

DEFAULTS = {
    "device": {
        "n_modes": 3,
        "nu_f": 7.169,
        "g_f": 0.118,
        "g_q1f": 0.135,
        "g_q2f": 0.144,
        "qubit_levels": 2,
        "anharmonicity": [-0.27, -0.27],
        "photon_cutoff": 3,
        "excitation_cap": 3,
        "t1": [2.36, 2.14],
        "ramsey_sigma": [312.0, 492.0],
    },
    "transmon": {
        "q1": {"e_c": 0.25, "e_j_max": 41.0, "charge_cutoff": 20, "n_g": 0.5},
        "q2": {"e_c": 0.25, "e_j_max": 41.0, "charge_cutoff": 20, "n_g": 0.5},
    },
    "spectroscopy": {
        "axis": "nu_q1",
        "grid": {"start": 6.6, "stop": 7.7, "points": 801},
        "block": 1,
        "fixed_other": 5.0,
    },
    "exchange_scan": {
        "grid": {"start": 6.225, "stop": 6.75, "points": 12},
    },
    "lz_ramp": {
        "grid": {"start": 2.0, "stop": 42.0, "points": 161},
        "total_time": 110.0,
        "start_nu": 6.2,
        "top_nu": 8.1,
        "decoherence": False,
        "realizations": 1,
    },
    "stark_ramsey": {
        "grid": {"start": 5.3, "stop": 8.4, "points": 14},
        "tau": {"start": 0.0, "stop": 399.0, "points": 267},
        "q1_start": 6.6,
        "q1_top": 7.9,
        "q1_park": 8.8,
        "load_ramp": 25.0,
        "q2_ramp": 25.0,
        "reference_nu": 5.3,
        "decoherence": False,
        "realizations": 1,
    },
    "cz": {
        "nu_int": 6.85,
        "t_int": 20.0,
        "load_ramp": 30.0,
        "retrieve_ramp": 30.0,
        "q2_ramp": 15.0,
        "refine": True,
    },
    "bell": {
        "decoherence": True,
        "shots": 10000,
        "realizations": 400,
        "bootstrap_resamples": 200,
    },
    "run": {
        "seed": 0,
        "threads": 1,
        "dt": 0.01,
    },
}


class ConfigError(ValueError):
    pass


def _merge(defaults, override, path=""):
    out = copy.deepcopy(defaults)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be a mapping")
            out[key] = _merge(defaults[key], value, here)
        else:
            out[key] = value
    return out


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(config: dict, dotted: str):
    """Apply a 'section.key=value' command-line override in place."""
    if "=" not in dotted:
        raise ConfigError(f"override {dotted!r} is not of the form key=value")
    path, value = dotted.split("=", 1)
    keys = path.split(".")
    node = config
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"unknown config key: {path}")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(f"unknown config key: {path}")
    node[keys[-1]] = _coerce(value)


def load_config(path=None, overrides=()) -> dict:
    """Defaults, optionally updated from a YAML file and dotted overrides."""
    if path is None:
        user = {}
    else:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ConfigError("config root must be a mapping")
    config = _merge(DEFAULTS, user)
    for item in overrides:
        apply_override(config, item)
    return config


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def device_from_config(config: dict) -> DeviceParams:
    d = config["device"]
    return reference_device(
        n_modes=int(d["n_modes"]), nu_f=float(d["nu_f"]), g_f=float(d["g_f"]),
        g_q1f=float(d["g_q1f"]), g_q2f=float(d["g_q2f"]),
        qubit_levels=int(d["qubit_levels"]),
        anharmonicity=tuple(float(a) for a in d["anharmonicity"]),
        photon_cutoff=int(d["photon_cutoff"]),
        excitation_cap=int(d["excitation_cap"]),
        t1=tuple(float(t) for t in d["t1"]),
        ramsey_sigma=tuple(float(s) for s in d["ramsey_sigma"]))


def transmons_from_config(config: dict):
    out = []
    for q in ("q1", "q2"):
        t = config["transmon"][q]
        out.append(TransmonParams(
            e_c=float(t["e_c"]), e_j_max=float(t["e_j_max"]),
            charge_cutoff=int(t["charge_cutoff"]), n_g=float(t["n_g"])))
    return tuple(out)


def grid_from_config(spec: dict):
    import numpy as np
    missing = GRID_KEYS - set(spec)
    if missing:
        raise ConfigError(f"grid needs keys {sorted(GRID_KEYS)}")
    return np.linspace(float(spec["start"]), float(spec["stop"]),
                       int(spec["points"]))
