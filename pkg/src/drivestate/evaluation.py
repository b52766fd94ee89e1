"""Scoring of an estimate stream against ground-truth labels."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import TimelineError


@dataclass
class EventInstance:
    label: str
    start_time: float
    end_time: float
    detected: bool
    latency: Optional[float]  # seconds from onset to first correct frame


@dataclass
class EvalReport:
    frame_count: int
    accuracy: float
    confusion: Dict[Tuple[str, str], int]
    events: List[EventInstance] = field(default_factory=list)

    @property
    def mean_latency(self) -> Optional[float]:
        latencies = [e.latency for e in self.events if e.latency is not None]
        if not latencies:
            return None
        return sum(latencies) / len(latencies)

    def to_dict(self) -> dict:
        return {
            "frame_count": self.frame_count,
            "accuracy": self.accuracy,
            "confusion": {
                f"{truth}|{est}": count for (truth, est), count in sorted(self.confusion.items())
            },
            "mean_detection_latency_s": self.mean_latency,
            "events": [
                {
                    "label": e.label,
                    "start_time": e.start_time,
                    "end_time": e.end_time,
                    "detected": e.detected,
                    "latency_s": e.latency,
                }
                for e in self.events
            ],
        }


def truth_segments(
    timestamps: Sequence[float], labels: Sequence[str]
) -> List[Tuple[str, int, int]]:
    """Contiguous (label, start index, end index inclusive) runs."""
    segments: List[Tuple[str, int, int]] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            segments.append((labels[start], start, i - 1))
            start = i
    return segments


def evaluate(
    timestamps: Sequence[float],
    estimates: Sequence[str],
    truth: Sequence[str],
    align_tolerance: float = 1e-6,
    truth_timestamps: Optional[Sequence[float]] = None,
) -> EvalReport:
    """Per-frame accuracy, confusion matrix, and per-event detection latency."""
    if len(estimates) != len(truth) or len(estimates) != len(timestamps):
        raise TimelineError(
            f"frame counts differ: {len(estimates)} estimates vs {len(truth)} truth"
        )
    if truth_timestamps is not None:
        if len(truth_timestamps) != len(timestamps) or any(
            abs(a - b) > align_tolerance for a, b in zip(timestamps, truth_timestamps)
        ):
            raise TimelineError("record and truth timestamps are not aligned")

    correct = 0
    confusion: Dict[Tuple[str, str], int] = {}
    for est, tru in zip(estimates, truth):
        if est == tru:
            correct += 1
        key = (tru, est)
        confusion[key] = confusion.get(key, 0) + 1

    events: List[EventInstance] = []
    for label, start, end in truth_segments(timestamps, truth):
        latency: Optional[float] = None
        for i in range(start, end + 1):
            if estimates[i] == label:
                latency = timestamps[i] - timestamps[start]
                break
        events.append(EventInstance(
            label=label,
            start_time=timestamps[start],
            end_time=timestamps[end],
            detected=latency is not None,
            latency=latency,
        ))

    return EvalReport(
        frame_count=len(truth),
        accuracy=correct / len(truth) if truth else 0.0,
        confusion=confusion,
        events=events,
    )
