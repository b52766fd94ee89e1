import json

import numpy as np
import pytest

from drivestate.errors import MissingModelError, ModelSchemaError
from drivestate.features import FEATURE_ORDER
from drivestate.serialization import MetastateRegistry, load_model, save_model

from oracles import random_model


@pytest.fixture
def model():
    return random_model(np.random.default_rng(4), 3, dimension=len(FEATURE_ORDER),
                        n_components=2)


def test_round_trip(tmp_path, model):
    path = tmp_path / "Right Turn.json"
    save_model(path, "Right Turn", model, seed=42)
    doc = load_model(path)
    assert doc.label == "Right Turn"
    assert doc.seed == 42
    np.testing.assert_allclose(doc.model.initial, model.initial)
    np.testing.assert_allclose(doc.model.transition, model.transition)
    for ga, gb in zip(doc.model.emissions, model.emissions):
        np.testing.assert_allclose(ga.weights, gb.weights)
        for ca, cb in zip(ga.components, gb.components):
            np.testing.assert_allclose(ca.mean, cb.mean)
            np.testing.assert_allclose(ca.covariance, cb.covariance)


def test_schema_fields_present(tmp_path, model):
    path = tmp_path / "m.json"
    save_model(path, "Stop", model, seed=7)
    doc = json.loads(path.read_text())
    for key in ("label", "N", "M", "dimension", "initial", "transition",
                "emissions", "feature_order", "trained_at", "seed"):
        assert key in doc
    assert doc["feature_order"] == list(FEATURE_ORDER)
    assert doc["N"] == 3
    assert doc["M"] == 2


def test_rejects_mismatched_feature_order(tmp_path, model):
    path = tmp_path / "m.json"
    save_model(path, "Stop", model, seed=7)
    doc = json.loads(path.read_text())
    doc["feature_order"] = list(reversed(doc["feature_order"]))
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelSchemaError, match="feature order"):
        load_model(path)


def test_rejects_missing_keys(tmp_path, model):
    path = tmp_path / "m.json"
    save_model(path, "Stop", model, seed=7)
    doc = json.loads(path.read_text())
    del doc["transition"]
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelSchemaError, match="transition"):
        load_model(path)


def test_registry_from_directory(tmp_path, model):
    save_model(tmp_path / "Stop.json", "Stop", model, seed=1)
    save_model(tmp_path / "Continue.json", "Continue", model, seed=1)
    registry = MetastateRegistry.from_directory(tmp_path)
    assert "Stop" in registry
    assert registry.get("Continue").num_states == 3
    with pytest.raises(MissingModelError, match="Left Turn"):
        registry.get("Left Turn")
