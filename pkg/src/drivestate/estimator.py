"""Online estimation loop: windowed forward scoring over the active metastates."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dss import (
    CONTINUE,
    EVENT_CLASSES,
    ContextState,
    DssConfiguration,
    ModificationEvent,
    ModificationKind,
    Rcs,
    apply_context_change,
    dss_for_context,
)
from .errors import DimensionError, TimelineError, TimestampOrderError
from .features import LogLikelihood, ObservationVector
from .hmm import emission_log_matrix, forward_from_log_obs
from .serialization import MetastateRegistry

DEFAULT_WINDOW_SIZE = 50


@dataclass
class EstimateRecord:
    """One row of the estimation timeline."""

    timestamp: float
    estimate: str
    scores: Dict[str, LogLikelihood]
    context: ContextState
    modification_events: List[ModificationEvent] = field(default_factory=list)


class EstimatorSession:
    """Single-stream online estimator; calls must be externally serialized."""

    def __init__(
        self,
        dss: DssConfiguration,
        registry: MetastateRegistry,
        window_size: int = DEFAULT_WINDOW_SIZE,
        context_map=None,
    ):
        if window_size < 1:
            raise ValueError("window size must be at least 1")
        self.registry = registry
        self.window_size = window_size
        self.context_map = context_map
        self.dss = dss
        self.current_estimate: str = CONTINUE
        self.scores: Dict[str, LogLikelihood] = {
            m.id: LogLikelihood.impossible() for m in dss.metastates
        }
        self.frame_index = 0
        self._window: Deque[ObservationVector] = deque(maxlen=window_size)
        # per-metastate cache of per-frame emission log densities, aligned
        # with the window so forward re-scoring never re-evaluates a frame
        self._log_obs: Dict[str, Deque[np.ndarray]] = {
            m.id: deque(maxlen=window_size) for m in dss.metastates
        }
        self._pending_events: List[ModificationEvent] = []
        self._last_timestamp = -math.inf

    @property
    def context(self) -> ContextState:
        return self.dss.context_binding

    @property
    def window(self) -> Tuple[ObservationVector, ...]:
        return tuple(self._window)

    def step(self, obs: ObservationVector) -> EstimateRecord:
        """Consume one frame, rescore every active metastate, pick the argmax."""
        if obs.timestamp <= self._last_timestamp:
            raise TimestampOrderError(
                f"timestamp {obs.timestamp} not after {self._last_timestamp}"
            )
        dim = self.dss.metastates[0].model.dimension
        if obs.features.size != dim:
            raise DimensionError(
                f"observation dimension {obs.features.size} != model dimension {dim}"
            )
        self._last_timestamp = obs.timestamp
        self._window.append(obs)
        self.frame_index += 1

        frame = obs.features[None, :]
        best_id = self.dss.metastates[0].id
        best_value = -math.inf
        for m in self.dss.metastates:
            cache = self._log_obs[m.id]
            cache.append(emission_log_matrix(m.model, frame)[0])
            log_obs = np.vstack(cache)
            value = forward_from_log_obs(m.model.initial, m.model.transition, log_obs)
            self.scores[m.id] = LogLikelihood.of(value)
            if value > best_value:  # strict: ties keep the lowest index
                best_value = value
                best_id = m.id
        self.current_estimate = best_id

        events, self._pending_events = self._pending_events, []
        return EstimateRecord(
            timestamp=obs.timestamp,
            estimate=self.current_estimate,
            scores=dict(self.scores),
            context=self.context,
            modification_events=events,
        )

    def notify_context_change(
        self, new_ctx: ContextState
    ) -> Tuple["EstimatorSession", List[ModificationEvent]]:
        """Reconfigure the DSS and reset window, scores, and caches.

        If the currently estimated metastate was pruned, the estimate falls
        back to Continue before rescoring.
        """
        if new_ctx == self.context:
            return self, []
        timestamp = self._last_timestamp if math.isfinite(self._last_timestamp) else 0.0
        new_dss, events = apply_context_change(
            self.dss, self.context, new_ctx, self.registry,
            timestamp=timestamp, context_map=self.context_map,
        )
        self.dss = new_dss
        self._window.clear()
        self._log_obs = {m.id: deque(maxlen=self.window_size) for m in new_dss.metastates}
        self.scores = {m.id: LogLikelihood.impossible() for m in new_dss.metastates}
        if self.current_estimate not in new_dss.ids:
            self.current_estimate = CONTINUE
        self._pending_events.extend(events)
        return self, events

    def predict_next_metastate(self) -> List[Tuple[str, float]]:
        """Rank the FSM row of the current metastate, descending, ties by id."""
        row = self.dss.metastate_fsm[self.dss.index_of(self.current_estimate)]
        pairs = list(zip(self.dss.ids, (float(p) for p in row)))
        return sorted(pairs, key=lambda pair: (-pair[1], pair[0]))


def run_offline(
    registry: MetastateRegistry,
    context_timeline: Sequence[Tuple[float, ContextState]],
    observations: Sequence[ObservationVector],
    window_size: int = DEFAULT_WINDOW_SIZE,
    context_map=None,
) -> List[EstimateRecord]:
    """Replay a logged drive: fire context changes and step in timestamp order."""
    if not observations:
        raise TimelineError("no observations to replay")
    if not context_timeline:
        raise TimelineError("context timeline is empty")
    times = [t for t, _ in context_timeline]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise TimelineError("context timeline timestamps must strictly increase")
    if times[0] > observations[0].timestamp:
        raise TimelineError(
            f"timeline starts at {times[0]}, after the first observation "
            f"at {observations[0].timestamp}"
        )

    first_ctx = context_timeline[0][1]
    session = EstimatorSession(
        dss_for_context(first_ctx, registry, context_map=context_map),
        registry,
        window_size=window_size,
        context_map=context_map,
    )
    records: List[EstimateRecord] = []
    pending = list(context_timeline[1:])
    for obs in observations:
        while pending and pending[0][0] <= obs.timestamp:
            _, ctx = pending.pop(0)
            session.notify_context_change(ctx)
        records.append(session.step(obs))
    return records


def _score_columns(records: Sequence[EstimateRecord]) -> List[str]:
    seen = {label for record in records for label in record.scores}
    ordered = [label for label in EVENT_CLASSES if label in seen]
    ordered += sorted(seen - set(ordered))
    return ordered


def write_records_csv(path: Path, records: Sequence[EstimateRecord]) -> None:
    """Serialize an estimate stream: timestamp, estimate, rcs, per-metastate
    log-likelihoods (blank when inactive), then semicolon-joined events."""
    columns = _score_columns(records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "estimate", "rcs", *columns, "events"])
        for record in records:
            row = [f"{record.timestamp:.6f}", record.estimate, record.context.rcs.value]
            for label in columns:
                score = record.scores.get(label)
                if score is None:
                    row.append("")
                elif not score.valid:
                    row.append("-inf")
                else:
                    row.append(f"{score.value:.9g}")
            row.append(";".join(
                f"{e.kind.value}:{e.metastate_id}" for e in record.modification_events
            ))
            writer.writerow(row)


@dataclass
class RecordRow:
    """One parsed row of a records CSV (context objects are not reconstructed)."""

    timestamp: float
    estimate: str
    rcs: Rcs
    scores: Dict[str, Optional[float]]
    events: List[Tuple[str, str]]


def read_records_csv(path: Path) -> List[RecordRow]:
    rows: List[RecordRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["timestamp", "estimate", "rcs"]:
            raise TimelineError(f"{path}: not a records CSV")
        score_names = header[3:-1]
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TimelineError(f"{path}: malformed row at line {line_no}")
            scores: Dict[str, Optional[float]] = {}
            for name, cell in zip(score_names, row[3:-1]):
                if cell == "":
                    scores[name] = None
                else:
                    scores[name] = float(cell)
            events = []
            if row[-1]:
                for token in row[-1].split(";"):
                    kind, _, label = token.partition(":")
                    events.append((kind, label))
            rows.append(RecordRow(
                timestamp=float(row[0]),
                estimate=row[1],
                rcs=Rcs(row[2]),
                scores=scores,
                events=events,
            ))
    return rows
