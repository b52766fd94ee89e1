"""The discrete state system: metastates, context states, and graft/prune algebra."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicateMetastateError,
    ProtectedMetastateError,
    StochasticityError,
    UnknownMetastateError,
)
from .hmm import HiddenMarkovModel
from .serialization import MetastateRegistry

CONTINUE = "Continue"

#: The eight trained driver event classes.
EVENT_CLASSES = (
    "Left Turn",
    "Right Turn",
    CONTINUE,
    "Stop",
    "Left Lane Change",
    "Right Lane Change",
    "Enter Highway",
    "Exit Highway",
)


class Rcs(str, enum.Enum):
    INTERSECTION = "Intersection"
    HIGHWAY = "Highway"
    ROAD = "Road"


class Ecs(str, enum.Enum):
    # Environmental conditions are represented but held at a single frozen state.
    NOMINAL = "Nominal"


class Tcs(str, enum.Enum):
    # Traffic conditions are represented but held at a single frozen state.
    NOMINAL = "Nominal"


@dataclass(frozen=True)
class ContextState:
    rcs: Rcs
    ecs: Ecs = Ecs.NOMINAL
    tcs: Tcs = Tcs.NOMINAL


#: Which metastates each roadway context activates. Road includes Stop so that
#: stop-and-go city driving away from intersections stays representable.
CONTEXT_METASTATES: Dict[Rcs, Tuple[str, ...]] = {
    Rcs.INTERSECTION: (CONTINUE, "Left Turn", "Right Turn", "Stop"),
    Rcs.HIGHWAY: (CONTINUE, "Left Lane Change", "Right Lane Change",
                  "Enter Highway", "Exit Highway"),
    Rcs.ROAD: (CONTINUE, "Left Lane Change", "Right Lane Change", "Stop"),
}


class ModificationKind(str, enum.Enum):
    GRAFT = "graft"
    PRUNE = "prune"


@dataclass(frozen=True)
class ModificationEvent:
    kind: ModificationKind
    metastate_id: str
    timestamp: float
    trigger: Tuple[ContextState, ContextState]

    def __post_init__(self) -> None:
        if self.trigger[0] == self.trigger[1]:
            raise ValueError("trigger context states must differ")


@dataclass(frozen=True)
class Metastate:
    """One node of the discrete state system wrapping a trained event model."""

    id: str
    model: HiddenMarkovModel
    is_default: bool = False


@dataclass(frozen=True)
class DssConfiguration:
    """Active metastate set, metastate-level FSM, and the context it is bound to."""

    metastates: Tuple[Metastate, ...]
    metastate_fsm: np.ndarray
    context_binding: ContextState

    def __post_init__(self) -> None:
        metastates = tuple(self.metastates)
        fsm = np.asarray(self.metastate_fsm, dtype=float)
        ids = [m.id for m in metastates]
        if len(set(ids)) != len(ids):
            raise DuplicateMetastateError(f"duplicate metastate ids: {ids}")
        defaults = [m for m in metastates if m.is_default]
        if len(defaults) != 1 or defaults[0].id != CONTINUE:
            raise ValueError(f"exactly one default '{CONTINUE}' metastate is required")
        n = len(metastates)
        if fsm.shape != (n, n):
            raise StochasticityError(f"fsm shape {fsm.shape} for {n} metastates")
        sums = fsm.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9) or np.any(fsm < -1e-15):
            raise StochasticityError(f"fsm rows must sum to 1 within 1e-9, got {sums}")
        fsm.setflags(write=False)
        object.__setattr__(self, "metastates", metastates)
        object.__setattr__(self, "metastate_fsm", fsm)

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(m.id for m in self.metastates)

    def __len__(self) -> int:
        return len(self.metastates)

    def index_of(self, metastate_id: str) -> int:
        for i, m in enumerate(self.metastates):
            if m.id == metastate_id:
                return i
        raise UnknownMetastateError(f"metastate '{metastate_id}' is not active")


RowPolicy = Callable[[np.ndarray], np.ndarray]


def uniform_share_policy(fsm: np.ndarray) -> np.ndarray:
    """Grow an n x n FSM to (n+1) x (n+1): the new column takes a 1/(n+1)
    share of each existing row and the new row is uniform."""
    n = fsm.shape[0]
    share = 1.0 / (n + 1)
    grown = np.full((n + 1, n + 1), share)
    grown[:n, :n] = fsm * (1.0 - share)
    grown[:n, n] = share
    return grown


def default_fsm(n: int, self_transition: float = 0.8) -> np.ndarray:
    """Uniform prior FSM: fixed self-transition mass, remainder split evenly."""
    if n == 1:
        return np.array([[1.0]])
    off = (1.0 - self_transition) / (n - 1)
    fsm = np.full((n, n), off)
    np.fill_diagonal(fsm, self_transition)
    return fsm


def graft(
    dss: DssConfiguration,
    metastate: Metastate,
    fsm_row_policy: RowPolicy = uniform_share_policy,
) -> DssConfiguration:
    """Add a metastate; the FSM grows per the row policy. Value-producing."""
    if metastate.id in dss.ids:
        raise DuplicateMetastateError(f"metastate '{metastate.id}' already active")
    return DssConfiguration(
        metastates=dss.metastates + (metastate,),
        metastate_fsm=fsm_row_policy(dss.metastate_fsm),
        context_binding=dss.context_binding,
    )


def prune(dss: DssConfiguration, metastate_id: str) -> DssConfiguration:
    """Remove a metastate; each surviving row's remaining mass is renormalized."""
    if metastate_id == CONTINUE:
        raise ProtectedMetastateError("the default Continue metastate is never pruned")
    idx = dss.index_of(metastate_id)
    keep = [i for i in range(len(dss)) if i != idx]
    fsm = dss.metastate_fsm[np.ix_(keep, keep)].copy()
    sums = fsm.sum(axis=1)
    zero = sums <= 0
    if np.any(zero):
        fsm[zero] = 1.0 / fsm.shape[1]
        sums[zero] = 1.0
    fsm /= sums[:, None]
    return DssConfiguration(
        metastates=tuple(dss.metastates[i] for i in keep),
        metastate_fsm=fsm,
        context_binding=dss.context_binding,
    )


def _build_metastate(metastate_id: str, registry: MetastateRegistry) -> Metastate:
    return Metastate(
        id=metastate_id,
        model=registry.get(metastate_id),
        is_default=metastate_id == CONTINUE,
    )


def dss_for_context(
    ctx: ContextState,
    registry: MetastateRegistry,
    context_map: Optional[Dict[Rcs, Sequence[str]]] = None,
) -> DssConfiguration:
    """Canonical configuration for a context: its metastate list and prior FSM."""
    mapping = context_map or CONTEXT_METASTATES
    ids = tuple(mapping[ctx.rcs])
    metastates = tuple(_build_metastate(i, registry) for i in ids)
    return DssConfiguration(
        metastates=metastates,
        metastate_fsm=default_fsm(len(ids)),
        context_binding=ctx,
    )


def apply_context_change(
    dss: DssConfiguration,
    old: ContextState,
    new: ContextState,
    registry: MetastateRegistry,
    timestamp: float = 0.0,
    context_map: Optional[Dict[Rcs, Sequence[str]]] = None,
) -> Tuple[DssConfiguration, List[ModificationEvent]]:
    """Reconfigure for a new context; prunes are emitted before grafts.

    Prunes follow the old configuration's ordering; grafts run in reverse
    canonical order for the new context so that the serial application lands
    on the canonical metastate list.
    """
    if old == new:
        return dss, []
    mapping = context_map or CONTEXT_METASTATES
    new_ids = tuple(mapping[new.rcs])
    trigger = (old, new)

    events: List[ModificationEvent] = []
    current = dss
    for metastate_id in dss.ids:
        if metastate_id not in new_ids and metastate_id != CONTINUE:
            current = prune(current, metastate_id)
            events.append(ModificationEvent(ModificationKind.PRUNE, metastate_id,
                                            timestamp, trigger))
    for metastate_id in reversed(new_ids):
        if metastate_id not in dss.ids:
            current = graft(current, _build_metastate(metastate_id, registry))
            events.append(ModificationEvent(ModificationKind.GRAFT, metastate_id,
                                            timestamp, trigger))
    # Serial grafting lands on the same metastate set as the canonical
    # configuration; return the canonical form so orderings stay stable.
    result = dss_for_context(new, registry, context_map=context_map)
    assert set(result.ids) == set(current.ids)
    return result, events
