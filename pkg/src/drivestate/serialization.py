"""Model document (de)serialization and the trained-metastate registry."""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import MissingModelError, ModelSchemaError
from .features import FEATURE_ORDER
from .gmm import diagonal_mixture
from .hmm import HiddenMarkovModel

_REQUIRED_KEYS = (
    "label", "N", "M", "dimension", "initial", "transition",
    "emissions", "feature_order", "trained_at", "seed",
)


@dataclass(frozen=True)
class ModelDocument:
    label: str
    model: HiddenMarkovModel
    seed: int
    trained_at: str


def save_model(
    path: Path,
    label: str,
    model: HiddenMarkovModel,
    seed: int,
    feature_order: Sequence[str] = FEATURE_ORDER,
    trained_at: Optional[str] = None,
) -> None:
    """Write one metastate model as a single JSON document."""
    emissions = []
    for mixture in model.emissions:
        diags = []
        for comp in mixture.components:
            if not comp.is_diagonal:
                raise ModelSchemaError("model files store diagonal covariances only")
            diags.append(comp.covariance.tolist())
        emissions.append({
            "weights": mixture.weights.tolist(),
            "means": [c.mean.tolist() for c in mixture.components],
            "covariance_diagonals": diags,
        })
    counts = {len(g.components) for g in model.emissions}
    if len(counts) != 1:
        raise ModelSchemaError("all states must share one mixture-component count")
    doc = {
        "label": label,
        "N": model.num_states,
        "M": counts.pop(),
        "dimension": model.dimension,
        "initial": model.initial.tolist(),
        "transition": model.transition.tolist(),
        "emissions": emissions,
        "feature_order": list(feature_order),
        "trained_at": trained_at or datetime.now(timezone.utc).isoformat(),
        "seed": int(seed),
    }
    Path(path).write_text(json.dumps(doc, indent=2))


def load_model(
    path: Path, feature_order: Sequence[str] = FEATURE_ORDER
) -> ModelDocument:
    """Load a model document, rejecting any feature-order mismatch."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelSchemaError(f"{path}: not valid JSON: {exc}") from exc
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ModelSchemaError(f"{path}: missing keys {missing}")
    if doc["dimension"] == len(feature_order) and list(doc["feature_order"]) != list(feature_order):
        raise ModelSchemaError(
            f"{path}: feature order {doc['feature_order']} does not match "
            f"the expected order {list(feature_order)}"
        )
    emissions = []
    for entry in doc["emissions"]:
        emissions.append(
            diagonal_mixture(
                entry["weights"],
                np.asarray(entry["means"], dtype=float),
                np.asarray(entry["covariance_diagonals"], dtype=float),
            )
        )
    model = HiddenMarkovModel(
        np.asarray(doc["initial"], dtype=float),
        np.asarray(doc["transition"], dtype=float),
        tuple(emissions),
    )
    if model.num_states != doc["N"] or model.dimension != doc["dimension"]:
        raise ModelSchemaError(f"{path}: declared N/dimension disagree with arrays")
    return ModelDocument(
        label=doc["label"], model=model, seed=int(doc["seed"]), trained_at=doc["trained_at"]
    )


class MetastateRegistry:
    """Read-only store of trained models keyed by metastate id."""

    def __init__(self, models: Optional[Dict[str, HiddenMarkovModel]] = None):
        self._models: Dict[str, HiddenMarkovModel] = dict(models or {})

    @classmethod
    def from_directory(cls, directory: Path) -> "MetastateRegistry":
        registry = cls()
        for path in sorted(Path(directory).glob("*.json")):
            doc = load_model(path)
            registry._models[doc.label] = doc.model
        return registry

    def add(self, label: str, model: HiddenMarkovModel) -> None:
        self._models[label] = model

    def get(self, label: str) -> HiddenMarkovModel:
        try:
            return self._models[label]
        except KeyError:
            raise MissingModelError(f"no trained model for metastate '{label}'") from None

    def __contains__(self, label: str) -> bool:
        return label in self._models

    def labels(self) -> Iterable[str]:
        return sorted(self._models)
