"""Run configuration shared by the CLI commands."""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .geomap import DEFAULT_INTERSECTION_RADIUS_M


@dataclass
class RunConfig:
    window_size: int = 50
    num_states: int = 4
    num_mixtures: int = 2
    covariance_floor: float = 1e-6
    intersection_radius: float = DEFAULT_INTERSECTION_RADIUS_M
    hysteresis: int = 3


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        doc = tomllib.loads(path.read_text())
    else:
        doc = json.loads(path.read_text())
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return RunConfig(**doc)
