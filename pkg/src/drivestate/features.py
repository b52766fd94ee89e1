"""Observation schema: the fixed vehicle feature vector and log-likelihood carrier."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionError, EmptySequenceError

#: Authoritative feature ordering for all serialized data and trained models.
FEATURE_ORDER = (
    "speed",
    "yaw_rate",
    "lateral_acceleration",
    "brake_pressure",
    "throttle_position",
    "steering_wheel_angle",
    "turn_signal_left",
    "turn_signal_right",
    "brake_light",
)

FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_ORDER)}

#: Channels constrained to [0, 1].
NORMALIZED_CHANNELS = ("brake_pressure", "throttle_position")
#: Binary indicator channels (exactly 0 or 1).
INDICATOR_CHANNELS = ("turn_signal_left", "turn_signal_right", "brake_light")


@dataclass(frozen=True)
class ObservationVector:
    """One timestamped frame of continuous vehicle features.

    Features follow ``FEATURE_ORDER``; normalized channels must lie in [0, 1]
    and indicator channels must be exactly 0 or 1.
    """

    timestamp: float
    features: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vec = np.asarray(self.features, dtype=float)
        if vec.shape != (len(FEATURE_ORDER),):
            raise DimensionError(
                f"expected {len(FEATURE_ORDER)} features, got shape {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError("features must be finite")
        for name in NORMALIZED_CHANNELS:
            v = vec[FEATURE_INDEX[name]]
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        for name in INDICATOR_CHANNELS:
            v = vec[FEATURE_INDEX[name]]
            if v not in (0.0, 1.0):
                raise ValueError(f"{name}={v} is not a 0/1 indicator")
        vec.setflags(write=False)
        object.__setattr__(self, "features", vec)

    def __getitem__(self, name: str) -> float:
        return float(self.features[FEATURE_INDEX[name]])


@dataclass(frozen=True)
class LogLikelihood:
    """Natural-log probability, with ``valid=False`` marking underflow to impossible."""

    value: float
    valid: bool = True

    def __post_init__(self) -> None:
        if math.isnan(self.value):
            raise ValueError("log-likelihood must not be NaN")

    @classmethod
    def of(cls, value: float) -> "LogLikelihood":
        """Wrap a raw log value; -inf is flagged as an invalid (impossible) score."""
        if value == -math.inf:
            return cls(-math.inf, valid=False)
        return cls(float(value), valid=True)

    @classmethod
    def impossible(cls) -> "LogLikelihood":
        return cls(-math.inf, valid=False)


ObsInput = Union[np.ndarray, Sequence[ObservationVector], Sequence[Sequence[float]]]


def as_feature_matrix(obs: ObsInput) -> np.ndarray:
    """Coerce a sequence of frames into a (T, d) float matrix.

    Accepts a 2-D array, a sequence of ObservationVector, or a sequence of
    per-frame feature vectors. 1-D input is treated as a single-feature sequence
    of shape (T, 1).
    """
    if isinstance(obs, np.ndarray):
        mat = np.asarray(obs, dtype=float)
        if mat.ndim == 1:
            mat = mat[:, None]
        if mat.ndim != 2:
            raise DimensionError(f"observations must be 2-D, got ndim={mat.ndim}")
        if mat.shape[0] == 0:
            raise EmptySequenceError("empty observation sequence")
        return mat
    frames: Iterable = obs
    rows = []
    for frame in frames:
        if isinstance(frame, ObservationVector):
            rows.append(frame.features)
        else:
            rows.append(np.asarray(frame, dtype=float))
    if not rows:
        raise EmptySequenceError("empty observation sequence")
    return np.vstack(rows).astype(float)


def timestamps_of(obs: Sequence[ObservationVector]) -> np.ndarray:
    return np.array([frame.timestamp for frame in obs], dtype=float)
