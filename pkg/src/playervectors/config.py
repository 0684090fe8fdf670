"""Pipeline configuration: one YAML file, a fingerprint and named seed streams."""
from __future__ import annotations

import copy
import hashlib
import json
import os
from pathlib import Path
from typing import Mapping, Optional

import yaml

ARTIFACTS_ENV = "PLAYERVECTORS_ARTIFACTS"


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "seed": 0,
    "season": None,
    "paths": {
        "events": "data/events.csv",
        "records": "data/records.csv",
        "truth": "data/truth.csv",
        "artifacts": "artifacts",
    },
    "ingest": {"clamp": True, "clamp_tolerance": 0.5, "orientation": "attacking", "mapping": None},
    "grid": {"m": 50, "n": 34, "sigma": 1.5, "normalization": "l1"},
    "layout": {"k": None},
    "nmf": {"max_iter": 500, "tol": 1e-4, "n_init": 1, "atol": 0.0},
    "positions": {
        "k_min": 5, "k_max": 10, "n_init": 10, "max_iter": 300, "switch_threshold": 30.0,
        "lateral_min": 15.0, "mirror_tol": 10.0, "central_tol": 8.0, "merge_map": None,
        "categorised_only": False,
    },
    "styles": {
        "positions": None,
        "nmf": {"max_iter": 2000, "tol": 1e-6, "n_init": 4, "atol": 0.0},
        "naming_min_score": 0.4,
        "start_position_min": 100,
    },
    "synth": {"n_teams": 14, "rounds": None, "season": "2025", "early_sub_rate": 0.02,
              "late_sub_rate": 0.3, "side_switch_rate": 0.01, "bench_size": 3,
              "touch_rate": 60.0, "touch_sd": 8.0},
}

# Keys that locate files rather than shape results; kept out of the fingerprint.
_UNFINGERPRINTED = ("paths",)


def _merge(base, override, where=""):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if key not in base:
            raise ConfigError(f"unknown config key {where + key!r}")
        if isinstance(base[key], dict) and isinstance(value, Mapping):
            out[key] = _merge(base[key], value, f"{where}{key}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


class Config:
    """Resolved configuration; relative paths resolve against ``base_dir``."""

    def __init__(self, data: Optional[Mapping] = None, base_dir=None):
        if data is not None and not isinstance(data, Mapping):
            raise ConfigError("config must be a mapping")
        self.data = _merge(DEFAULT_CONFIG, data or {})
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        self._check()

    @classmethod
    def load(cls, path=None):
        if path is None:
            return cls()
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        return cls(data, base_dir=path.parent)

    def _check(self):
        d = self.data
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigError("seed must be a non-negative integer")
        p = d["positions"]
        if not 2 <= p["k_min"] <= p["k_max"]:
            raise ConfigError("positions.k_min/k_max must satisfy 2 <= k_min <= k_max")
        for key in ("max_iter",):
            if d["nmf"][key] < 1 or d["styles"]["nmf"][key] < 1:
                raise ConfigError("nmf max_iter must be >= 1")

    def __getitem__(self, key):
        return self.data[key]

    def path(self, key):
        return (self.base_dir / self.data["paths"][key]).resolve()

    @property
    def artifact_root(self):
        env = os.environ.get(ARTIFACTS_ENV)
        if env:
            return Path(env).resolve()
        return self.path("artifacts")

    def to_dict(self):
        return copy.deepcopy(self.data)

    def dump(self, path):
        Path(path).write_text(yaml.safe_dump(self.data, sort_keys=True))

    def fingerprint(self):
        return fingerprint({k: v for k, v in self.data.items() if k not in _UNFINGERPRINTED})

    def seed(self, name):
        return substream_seed(self.data["seed"], name)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def fingerprint(obj):
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:16]


def substream_seed(root, name):
    """Seed of the named random stream (e.g. ``nmf.shot``) under a top-level seed."""
    digest = hashlib.sha256(f"{int(root)}/{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
