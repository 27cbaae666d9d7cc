"""Scenario configuration: JSON files with full defaults, dotted-path
overrides, canonical hashing for reproducibility metadata."""

from __future__ import annotations

import copy
import hashlib
import json

from .errors import ConfigError

# One schema serves every subcommand; each command reads the blocks it needs.
DEFAULT_CONFIG = {
    "physical": {
        "lambda_nm": 842.0,
        "a_s_nm": 5.45,
        "mass_u": 86.909,
        "V_Er": 10.0,
        "V_perp_Er": 30.0,
        "dV": 0.2,
        "omega_rad_s": None,      # null -> resonant U/hbar
    },
    "system": {
        "L": 6,
        "N": 6,
    },
    "schedule": {
        "drive_ms": 100.0,
        "hold_ms": 50.0,
        "freeze_ms": 50.0,
        "freeze_depth_Er": 30.0,
    },
    "integration": {
        "steps_per_period": 100,
        "static_step": 0.5,       # units of hbar/E_R
        "accuracy": 1e-8,         # step-halving fidelity tolerance; null disables
    },
    "ground_scan": {
        "cases": [[6, 6], [6, 3], [6, 2]],
        "u_over_j": {"min": 0.0, "max": 50.0, "points": 26},
        "extra_u_over_j": [10000.0],
    },
    "thermal_scan": {
        "temperatures_nK": [0.0, 40.0, 80.0],
        "u_over_j": {"min": 5.0, "max": 50.0, "points": 10},
        "dense_cap": 2000,
    },
    "drive": {
        "cases": [[8, 8], [6, 6], [4, 4], [6, 5], [6, 7]],
        "snapshot_ms": 0.5,
    },
    "fidelity_scan": {
        "parameter": "t",
        # offsets span +- span_factor * expected_width on a uniform grid
        "expected_width": {"t": 1e-4, "V": 0.08, "V_perp": 0.12, "dV": 0.016, "omega": 14.5},
        "points": 81,
        "span_factor": 4.0,
    },
    "mixed_negativity": {
        "tau_ms": [0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015, 0.0175, 0.02,
                   0.05, 0.1, 0.2, 0.5, 1.0],
        "nodes": 41,
        "fit_tau_max_ms": 0.02,
    },
    "output": {
        "dir": "latticesim_out",
        "float_format": "repr",   # shortest round-trip representation
    },
    "workers": None,              # null -> LATTICESIM_THREADS or cpu count
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def _merge(base: dict, override: dict, path=""):
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, where)
        else:
            base[key] = value


def load_config(path: str | None, overrides=()) -> dict:
    """Defaults, overlaid with a JSON file and then with KEY.PATH=VALUE strings."""
    cfg = default_config()
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        _merge(cfg, user)
    for item in overrides:
        apply_override(cfg, item)
    validate_config(cfg)
    return cfg


def apply_override(cfg: dict, item: str):
    """Apply one '--set a.b.c=value' override; values parse as JSON when possible."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key.path=value")
    keypath, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings stay strings
    node = cfg
    parts = keypath.strip().split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config section {part!r} in {keypath!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config field {keypath!r}")
    node[parts[-1]] = value


def validate_config(cfg: dict):
    phys = cfg["physical"]
    for field in ("lambda_nm", "a_s_nm", "mass_u", "V_Er", "V_perp_Er"):
        if not isinstance(phys[field], (int, float)) or phys[field] <= 0:
            raise ConfigError(f"physical.{field} must be a positive number, got {phys[field]!r}")
    if not 0 <= phys["dV"] < 1:
        raise ConfigError(f"physical.dV must lie in [0, 1), got {phys['dV']!r}")
    sysb = cfg["system"]
    for field in ("L", "N"):
        if not isinstance(sysb[field], int) or sysb[field] < 0:
            raise ConfigError(f"system.{field} must be a non-negative integer")
    if sysb["L"] < 2:
        raise ConfigError("system.L must be at least 2")
    sched = cfg["schedule"]
    for field in ("drive_ms", "hold_ms", "freeze_ms"):
        if sched[field] < 0:
            raise ConfigError(f"schedule.{field} must be non-negative")
    if sched["drive_ms"] <= 0:
        raise ConfigError("schedule.drive_ms must be positive")
    par = cfg["fidelity_scan"]["parameter"]
    if par not in ("t", "V", "V_perp", "dV", "omega"):
        raise ConfigError(f"fidelity_scan.parameter must be one of t/V/V_perp/dV/omega, got {par!r}")
    for case in cfg["drive"]["cases"] + cfg["ground_scan"]["cases"]:
        if (not isinstance(case, (list, tuple)) or len(case) != 2
                or not all(isinstance(x, int) and x >= 0 for x in case)):
            raise ConfigError(f"cases must be [L, N] integer pairs, got {case!r}")
        if case[0] % 2 != 0:
            raise ConfigError(f"case {case!r}: balanced postselection needs an even L")


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def grid_from_spec(spec: dict):
    """[min, max] with `points` uniform samples."""
    import numpy as np

    pts = int(spec["points"])
    if pts < 2:
        raise ConfigError("grids need at least 2 points")
    return np.linspace(float(spec["min"]), float(spec["max"]), pts)
