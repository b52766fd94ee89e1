import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drivestate.dss import CONTINUE, EVENT_CLASSES, ContextState, Rcs
from drivestate.serialization import MetastateRegistry
from drivestate.train import TrainConfig, baum_welch_train
from drivestate.trajectory import default_template, generate_event


def train_event_model(kind: str, n_sequences: int = 20, seed: int = 7,
                      num_states: int = 3, num_mixtures: int = 1):
    """Train one event model on synthetic sequences of its own class."""
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(n_sequences):
        entry = None
        overrides = {}
        if kind == CONTINUE:
            # vary speed (city through highway) and mild accel so Continue generalizes
            v0 = rng.uniform(2.0, 30.0)
            overrides = dict(entry_speed=v0, exit_speed=max(v0 + rng.uniform(-2.0, 4.0), 0.5),
                             duration=rng.uniform(6.0, 12.0))
        elif kind == "Stop":
            overrides = dict(entry_speed=rng.uniform(6.0, 10.0),
                             duration=10.0)
        template = default_template(kind, **overrides)
        sequences.append(
            generate_event(template, seed=int(rng.integers(2**32)))
            .feature_matrix()
        )
    result = baum_welch_train(
        sequences, num_states, num_mixtures,
        TrainConfig(max_iters=25, seed=seed),
    )
    return result.model


@pytest.fixture(scope="session")
def trained_registry():
    """Models for all eight event classes, trained on synthetic data."""
    registry = MetastateRegistry()
    for kind in EVENT_CLASSES:
        registry.add(kind, train_event_model(kind))
    return registry


@pytest.fixture
def road_ctx():
    return ContextState(Rcs.ROAD)


@pytest.fixture
def intersection_ctx():
    return ContextState(Rcs.INTERSECTION)


@pytest.fixture
def highway_ctx():
    return ContextState(Rcs.HIGHWAY)
