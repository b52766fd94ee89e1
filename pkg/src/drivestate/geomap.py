"""Map-based roadway context resolution over planar local coordinates."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .dss import ContextState, Rcs
from .errors import TimelineError

#: 100 feet in meters: the intersection proximity threshold.
DEFAULT_INTERSECTION_RADIUS_M = 30.48


@dataclass(frozen=True)
class Intersection:
    id: str
    position: Tuple[float, float]


@dataclass(frozen=True)
class Highway:
    id: str
    polyline: Tuple[Tuple[float, float], ...]
    width: float

    def __post_init__(self) -> None:
        if len(self.polyline) < 2:
            raise ValueError(f"highway '{self.id}' needs at least 2 polyline points")
        if self.width <= 0:
            raise ValueError(f"highway '{self.id}' width must be positive")


@dataclass(frozen=True)
class MapModel:
    intersections: Tuple[Intersection, ...] = ()
    highways: Tuple[Highway, ...] = ()
    intersection_radius: float = DEFAULT_INTERSECTION_RADIUS_M

    def __post_init__(self) -> None:
        if self.intersection_radius <= 0:
            raise ValueError("intersection radius must be positive")
        ids = [i.id for i in self.intersections] + [h.id for h in self.highways]
        if len(set(ids)) != len(ids):
            raise ValueError(f"map feature ids must be unique: {ids}")
        object.__setattr__(self, "intersections", tuple(self.intersections))
        object.__setattr__(self, "highways", tuple(self.highways))


@dataclass(frozen=True)
class PositionFix:
    timestamp: float
    position: Tuple[float, float]


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
    return float(np.hypot(*(p - (a + t * ab))))


def _polyline_distance(point: Tuple[float, float], polyline: Sequence[Tuple[float, float]]) -> float:
    p = np.asarray(point, dtype=float)
    pts = np.asarray(polyline, dtype=float)
    return min(
        _segment_distance(p, pts[i], pts[i + 1]) for i in range(len(pts) - 1)
    )


def resolve_context(map_model: MapModel, fix: PositionFix) -> ContextState:
    """Intersection within the radius wins, then highway corridor, else Road."""
    p = np.asarray(fix.position, dtype=float)
    for intersection in map_model.intersections:
        if float(np.hypot(*(p - np.asarray(intersection.position)))) <= map_model.intersection_radius:
            return ContextState(Rcs.INTERSECTION)
    for highway in map_model.highways:
        if _polyline_distance(fix.position, highway.polyline) <= highway.width / 2.0:
            return ContextState(Rcs.HIGHWAY)
    return ContextState(Rcs.ROAD)


def context_timeline(
    map_model: MapModel, track: Sequence[PositionFix], hysteresis: int = 3
) -> List[Tuple[float, ContextState]]:
    """Debounced change stream: a new state is emitted once it persists for
    `hysteresis` consecutive fixes, timestamped at the fix that confirms it.

    The first entry is the raw state at the first fix.
    """
    if not track:
        raise TimelineError("position track is empty")
    if hysteresis < 1:
        raise ValueError("hysteresis must be at least 1")
    times = [fix.timestamp for fix in track]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise TimelineError("track timestamps must strictly increase")

    initial = resolve_context(map_model, track[0])
    timeline: List[Tuple[float, ContextState]] = [(track[0].timestamp, initial)]
    emitted = initial
    candidate = initial
    run = 0
    for fix in track[1:]:
        raw = resolve_context(map_model, fix)
        if raw == candidate:
            run += 1
        else:
            candidate = raw
            run = 1
        if candidate != emitted and run >= hysteresis:
            timeline.append((fix.timestamp, candidate))
            emitted = candidate
    return timeline


def load_map(path: Path) -> MapModel:
    """Map file schema: {intersection_radius_m, intersections: [{id, x, y}],
    highways: [{id, width_m, points: [[x, y], ...]}]}."""
    doc = json.loads(Path(path).read_text())
    intersections = tuple(
        Intersection(id=e["id"], position=(float(e["x"]), float(e["y"])))
        for e in doc.get("intersections", [])
    )
    highways = tuple(
        Highway(
            id=e["id"],
            polyline=tuple((float(x), float(y)) for x, y in e["points"]),
            width=float(e["width_m"]),
        )
        for e in doc.get("highways", [])
    )
    return MapModel(
        intersections=intersections,
        highways=highways,
        intersection_radius=float(
            doc.get("intersection_radius_m", DEFAULT_INTERSECTION_RADIUS_M)
        ),
    )


def read_track_csv(path: Path) -> List[PositionFix]:
    """Track CSV with header: timestamp, x, y."""
    import csv

    fixes: List[PositionFix] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["timestamp", "x", "y"]:
            raise TimelineError(f"{path}: expected header timestamp,x,y")
        for row in reader:
            fixes.append(PositionFix(float(row[0]), (float(row[1]), float(row[2]))))
    if not fixes:
        raise TimelineError(f"{path}: no fixes")
    return fixes
