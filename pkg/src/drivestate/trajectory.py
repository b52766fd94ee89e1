"""Parametric kinematic generator for labeled synthetic driving sequences."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dss import CONTINUE, EVENT_CLASSES, ContextState, Rcs
from .errors import TemplateError
from .features import FEATURE_INDEX, FEATURE_ORDER, ObservationVector

# channel indices
_SPEED = FEATURE_INDEX["speed"]
_YAW = FEATURE_INDEX["yaw_rate"]
_LAT = FEATURE_INDEX["lateral_acceleration"]
_BRAKE = FEATURE_INDEX["brake_pressure"]
_THROTTLE = FEATURE_INDEX["throttle_position"]
_STEER = FEATURE_INDEX["steering_wheel_angle"]
_SIG_L = FEATURE_INDEX["turn_signal_left"]
_SIG_R = FEATURE_INDEX["turn_signal_right"]
_BRAKE_LIGHT = FEATURE_INDEX["brake_light"]

_CONTINUOUS = (_SPEED, _YAW, _LAT, _BRAKE, _THROTTLE, _STEER)

#: Default per-channel noise standard deviations (continuous channels only).
DEFAULT_NOISE: Dict[str, float] = {
    "speed": 0.05,
    "yaw_rate": 0.005,
    "lateral_acceleration": 0.05,
    "brake_pressure": 0.01,
    "throttle_position": 0.01,
    "steering_wheel_angle": 0.01,
}

_WHEELBASE = 2.7
_STEERING_RATIO = 16.0
_MAX_BRAKE_DECEL = 6.0


@dataclass(frozen=True)
class EventTemplate:
    """Kinematic parameters for one synthetic driving event."""

    kind: str
    duration: float
    entry_speed: float
    exit_speed: float
    peak_yaw_rate: float = 0.0
    deceleration: float = 2.5
    signal_prob: float = 0.9
    noise: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_NOISE))

    def __post_init__(self) -> None:
        if self.kind not in EVENT_CLASSES:
            raise TemplateError(f"unknown event kind '{self.kind}'")
        if self.duration <= 0:
            raise TemplateError("duration must be positive")
        if self.entry_speed < 0 or self.exit_speed < 0:
            raise TemplateError("speeds must be non-negative")
        if any(v < 0 for v in self.noise.values()):
            raise TemplateError("noise standard deviations must be non-negative")
        if self.kind == "Stop" and self.deceleration <= 0:
            raise TemplateError("Stop events need a positive deceleration")


_DEFAULTS: Dict[str, Dict[str, float]] = {
    CONTINUE: dict(duration=10.0, entry_speed=8.0, exit_speed=8.0),
    "Left Turn": dict(duration=7.0, entry_speed=8.0, exit_speed=8.0, peak_yaw_rate=0.45),
    "Right Turn": dict(duration=7.0, entry_speed=8.0, exit_speed=8.0, peak_yaw_rate=0.45),
    "Stop": dict(duration=8.0, entry_speed=8.0, exit_speed=0.0, deceleration=2.5),
    "Left Lane Change": dict(duration=4.0, entry_speed=25.0, exit_speed=25.0,
                             peak_yaw_rate=0.12),
    "Right Lane Change": dict(duration=4.0, entry_speed=25.0, exit_speed=25.0,
                              peak_yaw_rate=0.12),
    "Enter Highway": dict(duration=10.0, entry_speed=15.0, exit_speed=28.0,
                          peak_yaw_rate=0.08),
    "Exit Highway": dict(duration=10.0, entry_speed=28.0, exit_speed=15.0,
                         peak_yaw_rate=0.08),
}


def default_template(kind: str, **overrides) -> EventTemplate:
    """Template with plausibility defaults for one of the eight event classes."""
    if kind not in _DEFAULTS:
        raise TemplateError(f"unknown event kind '{kind}'")
    params = dict(_DEFAULTS[kind])
    params.update(overrides)
    return EventTemplate(kind=kind, **params)


@dataclass(frozen=True)
class RouteScript:
    """Ordered events with the roadway context active during each."""

    events: Tuple[Tuple[EventTemplate, ContextState], ...]
    sample_rate: float = 10.0
    seed: int = 42

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise TemplateError("sample_rate must be positive")
        if not self.events:
            raise TemplateError("route script needs at least one event")
        for template, ctx in self.events:
            _check_pairing(template.kind, ctx)


def _check_pairing(kind: str, ctx: ContextState) -> None:
    if kind in ("Left Turn", "Right Turn") and ctx.rcs is not Rcs.INTERSECTION:
        raise TemplateError(f"{kind} is only valid under Intersection context")
    if kind in ("Enter Highway", "Exit Highway") and ctx.rcs is not Rcs.HIGHWAY:
        raise TemplateError(f"{kind} is only valid under Highway context")
    if kind in ("Left Lane Change", "Right Lane Change") and ctx.rcs is Rcs.INTERSECTION:
        raise TemplateError(f"{kind} is not valid under Intersection context")


@dataclass
class LabeledSequence:
    """Frames plus per-frame ground-truth labels and the context-change timeline."""

    frames: List[ObservationVector]
    labels: List[str]
    context_timeline: List[Tuple[float, ContextState]]

    def feature_matrix(self) -> np.ndarray:
        return np.vstack([f.features for f in self.frames])

    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])


def _raised_cosine_pulse(
    n_frames: int, pulse_frames: int, dt: float, total_angle: float
) -> np.ndarray:
    """Centered single-lobe yaw pulse whose rectangle-rule integral is exact."""
    pulse_frames = max(2, min(pulse_frames, n_frames))
    k = np.arange(pulse_frames)
    lobe = 0.5 * (1.0 - np.cos(2.0 * np.pi * k / pulse_frames))
    lobe *= total_angle / (lobe.sum() * dt)
    yaw = np.zeros(n_frames)
    start = (n_frames - pulse_frames) // 2
    yaw[start:start + pulse_frames] = lobe
    return yaw


def _yaw_doublet(n_frames: int, pulse_frames: int, peak: float) -> np.ndarray:
    """Full sine period: heading returns to its original value."""
    pulse_frames = max(2, min(pulse_frames, n_frames))
    k = np.arange(pulse_frames)
    lobe = peak * np.sin(2.0 * np.pi * k / pulse_frames)
    yaw = np.zeros(n_frames)
    start = (n_frames - pulse_frames) // 2
    yaw[start:start + pulse_frames] = lobe
    return yaw


def _speed_profile(template: EventTemplate, n: int, dt: float) -> np.ndarray:
    t = np.arange(n) * dt
    if template.kind == "Stop":
        decel_time = template.entry_speed / template.deceleration
        if (n - 1) * dt < decel_time:
            raise TemplateError(
                f"Stop duration {template.duration}s too short to reach standstill "
                f"from {template.entry_speed} m/s at {template.deceleration} m/s^2"
            )
        return np.maximum(template.entry_speed - template.deceleration * t, 0.0)
    return np.linspace(template.entry_speed, template.exit_speed, n)


def _event_matrix(template: EventTemplate, rate: float, rng: np.random.Generator) -> np.ndarray:
    dt = 1.0 / rate
    n = max(2, int(round(template.duration * rate)))
    x = np.zeros((n, len(FEATURE_ORDER)))

    speed = _speed_profile(template, n, dt)
    kind = template.kind
    if kind in ("Left Turn", "Right Turn"):
        sign = 1.0 if kind == "Left Turn" else -1.0
        pulse_frames = int(round((np.pi / max(template.peak_yaw_rate, 1e-6)) * rate))
        yaw = _raised_cosine_pulse(n, pulse_frames, dt, sign * np.pi / 2.0)
    elif kind in ("Left Lane Change", "Right Lane Change"):
        sign = 1.0 if kind == "Left Lane Change" else -1.0
        yaw = _yaw_doublet(n, int(round(template.duration * rate)), sign * template.peak_yaw_rate)
    elif kind in ("Enter Highway", "Exit Highway"):
        # gentle merge arc; ramps curve rightward in the synthetic road layout
        yaw = _raised_cosine_pulse(
            n, int(round(0.6 * n)), dt, -template.peak_yaw_rate * 0.6 * n * dt * 0.5
        )
    else:
        yaw = np.zeros(n)

    accel = np.gradient(speed, dt) if n > 1 else np.zeros(n)
    brake = np.clip(-accel / _MAX_BRAKE_DECEL, 0.0, 1.0)
    throttle = np.where(
        brake > 1e-9,
        0.0,
        np.clip(0.1 + 0.02 * speed + 0.15 * np.clip(accel, 0.0, None), 0.0, 1.0),
    )
    throttle = np.where((speed < 0.1) & (accel <= 0), 0.0, throttle)

    x[:, _SPEED] = speed
    x[:, _YAW] = yaw
    x[:, _LAT] = speed * yaw
    x[:, _BRAKE] = brake
    x[:, _THROTTLE] = throttle
    x[:, _STEER] = yaw * _WHEELBASE * _STEERING_RATIO / np.maximum(speed, 3.0)
    x[:, _BRAKE_LIGHT] = (brake > 0.02).astype(float)

    signaled = rng.random() < template.signal_prob
    if signaled:
        if kind in ("Left Turn", "Left Lane Change", "Enter Highway"):
            x[:, _SIG_L] = 1.0
        elif kind in ("Right Turn", "Right Lane Change", "Exit Highway"):
            x[:, _SIG_R] = 1.0

    for name, sigma in template.noise.items():
        if sigma > 0:
            x[:, FEATURE_INDEX[name]] += rng.normal(0.0, sigma, size=n)
    x[:, _SPEED] = np.maximum(x[:, _SPEED], 0.0)
    x[:, _BRAKE] = np.clip(x[:, _BRAKE], 0.0, 1.0)
    x[:, _THROTTLE] = np.clip(x[:, _THROTTLE], 0.0, 1.0)
    return x


def _wrap(matrix: np.ndarray, rate: float, t0: float = 0.0) -> List[ObservationVector]:
    dt = 1.0 / rate
    return [
        ObservationVector(timestamp=t0 + i * dt, features=matrix[i])
        for i in range(matrix.shape[0])
    ]


def generate_event(
    template: EventTemplate, seed: int, sample_rate: float = 10.0
) -> LabeledSequence:
    """One labeled event; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    matrix = _event_matrix(template, sample_rate, rng)
    frames = _wrap(matrix, sample_rate)
    return LabeledSequence(
        frames=frames,
        labels=[template.kind] * len(frames),
        context_timeline=[],
    )


def generate_route(script: RouteScript) -> LabeledSequence:
    """Concatenated events with speed blending at seams and a context timeline."""
    rng = np.random.default_rng(script.seed)
    rate = script.sample_rate
    dt = 1.0 / rate
    blocks: List[np.ndarray] = []
    labels: List[str] = []
    contexts: List[ContextState] = []
    for template, ctx in script.events:
        event_rng = np.random.default_rng(rng.integers(2**32))
        block = _event_matrix(template, rate, event_rng)
        blocks.append(block)
        labels.extend([template.kind] * block.shape[0])
        contexts.extend([ctx] * block.shape[0])
    matrix = np.vstack(blocks)

    # linear speed blend over 0.5 s at each seam for C1-continuous splicing
    half = max(1, int(round(0.25 * rate)))
    seam = 0
    for block in blocks[:-1]:
        seam += block.shape[0]
        lo = max(0, seam - half)
        hi = min(matrix.shape[0] - 1, seam + half)
        if hi > lo:
            blend = np.linspace(matrix[lo, _SPEED], matrix[hi, _SPEED], hi - lo + 1)
            matrix[lo:hi + 1, _SPEED] = blend
            matrix[lo:hi + 1, _LAT] = blend * matrix[lo:hi + 1, _YAW]

    frames = _wrap(matrix, rate)
    timeline: List[Tuple[float, ContextState]] = [(frames[0].timestamp, contexts[0])]
    for i in range(1, len(contexts)):
        if contexts[i] != contexts[i - 1]:
            timeline.append((frames[i].timestamp, contexts[i]))
    return LabeledSequence(frames=frames, labels=labels, context_timeline=timeline)


def _context_for_frame(
    timeline: Sequence[Tuple[float, ContextState]], timestamp: float
) -> ContextState:
    current = timeline[0][1]
    for t, ctx in timeline:
        if t <= timestamp:
            current = ctx
        else:
            break
    return current


def write_labeled_csv(path: Path, sequence: LabeledSequence) -> None:
    """CSV columns: timestamp, the authoritative feature order, label, rcs."""
    timeline = sequence.context_timeline or [
        (sequence.frames[0].timestamp, ContextState(Rcs.ROAD))
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", *FEATURE_ORDER, "label", "rcs"])
        for frame, label in zip(sequence.frames, sequence.labels):
            ctx = _context_for_frame(timeline, frame.timestamp)
            writer.writerow([
                f"{frame.timestamp:.6f}",
                *(f"{v:.9g}" for v in frame.features),
                label,
                ctx.rcs.value,
            ])


def read_labeled_csv(path: Path) -> LabeledSequence:
    frames: List[ObservationVector] = []
    labels: List[str] = []
    timeline: List[Tuple[float, ContextState]] = []
    expected = ["timestamp", *FEATURE_ORDER, "label", "rcs"]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise TemplateError(f"{path}: unexpected header {header}")
        last_rcs: Optional[Rcs] = None
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise TemplateError(f"{path}: malformed row at line {line_no}")
            timestamp = float(row[0])
            features = np.array([float(v) for v in row[1:1 + len(FEATURE_ORDER)]])
            frames.append(ObservationVector(timestamp=timestamp, features=features))
            labels.append(row[-2])
            rcs = Rcs(row[-1])
            if rcs != last_rcs:
                timeline.append((timestamp, ContextState(rcs)))
                last_rcs = rcs
    if not frames:
        raise TemplateError(f"{path}: no data rows")
    return LabeledSequence(frames=frames, labels=labels, context_timeline=timeline)


def load_route_script(path: Path) -> RouteScript:
    """Route script document: {sample_rate, seed, events: [{kind, context, ...}]}."""
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError as exc:
                raise TemplateError("TOML scripts require Python 3.11+ or tomli") from exc
        doc = tomllib.loads(path.read_text())
    else:
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise TemplateError(f"{path}: not valid JSON: {exc}") from exc
    try:
        events = []
        for entry in doc["events"]:
            entry = dict(entry)
            kind = entry.pop("kind")
            ctx = ContextState(Rcs(entry.pop("context")))
            events.append((default_template(kind, **entry), ctx))
        return RouteScript(
            events=tuple(events),
            sample_rate=float(doc.get("sample_rate", 10.0)),
            seed=int(doc.get("seed", 42)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TemplateError(f"{path}: invalid route script: {exc}") from exc
