"""Trained prediction functions, their parameters and persistence."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from ..dataset import CLASSIFICATION, REGRESSION, Dataset
from ..encoding import EncoderSpec, FeatureVector, Vocabulary, schema_hash
from .baseline import ConstantModel, fit_mean, fit_priors
from .forest import RandomForest, fit_forest
from .linear import LinearModel, fit_linear
from .tree import DecisionTree, fit_tree

DECISION_TREE = "decisionTree"
RANDOM_FOREST = "randomForest"
LINEAR_REGRESSION = "linearRegression"
MEAN_BASELINE = "meanBaseline"
ALGORITHMS = (DECISION_TREE, RANDOM_FOREST, LINEAR_REGRESSION, MEAN_BASELINE)

MODEL_FORMAT = "foepm-model"
MODEL_VERSION = 1

_ESTIMATORS = {
    DECISION_TREE: DecisionTree,
    RANDOM_FOREST: RandomForest,
    LINEAR_REGRESSION: LinearModel,
    MEAN_BASELINE: ConstantModel,
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class TrainParams:
    max_depth: int = 12
    min_samples_leaf: int = 5
    n_trees: int = 100
    feature_fraction: Optional[float] = None  # None: round(sqrt(p)) features per split
    bootstrap: bool = True
    seed: int = 42
    ridge_epsilon: float = 1e-8

    def __post_init__(self):
        if self.max_depth < 1 or self.min_samples_leaf < 1 or self.n_trees < 1:
            raise ValueError("max_depth, min_samples_leaf and n_trees must be positive")
        if self.feature_fraction is not None and not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must lie in (0, 1]")
        if self.ridge_epsilon <= 0:
            raise ValueError("ridge_epsilon must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown training parameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class Prediction:
    value: object  # real for regression, class label for classification
    scores: Optional[dict] = None  # class label -> score


@dataclass
class Model:
    algorithm: str
    kind: str
    schema: tuple[str, ...]
    class_labels: tuple
    params: TrainParams
    estimator: object
    encoders: tuple[EncoderSpec, ...] = ()
    vocabulary: Optional[Vocabulary] = None
    meta: dict = field(default_factory=dict)

    @property
    def schema_hash(self) -> str:
        return schema_hash(self.schema)

    def check_schema(self, schema: Sequence[str]) -> None:
        got = schema_hash(schema)
        if got != self.schema_hash:
            raise ModelError(f"feature schema {got} does not match the model's schema {self.schema_hash}")

    def predict_matrix(self, X: np.ndarray) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """Predicted values (regression) or class indices, plus class scores."""
        X = np.asarray(X, dtype=float).reshape(-1, len(self.schema))
        if self.kind == REGRESSION:
            return self.estimator.predict_value(X), None
        scores = self.estimator.predict_proba(X)
        return np.argmax(scores, axis=1), scores


def train(dataset: Dataset, algorithm: str, params: TrainParams = TrainParams(), workers: int = 1) -> Model:
    if algorithm not in ALGORITHMS:
        raise ModelError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    if len(dataset) == 0:
        raise ModelError("cannot train on an empty dataset")
    classification = dataset.kind == CLASSIFICATION
    if algorithm == LINEAR_REGRESSION and classification:
        raise ModelError("linearRegression needs a numeric rule (regression dataset)")
    n_classes = len(dataset.class_labels) if classification else 0
    X, y = dataset.X, dataset.y
    if algorithm == DECISION_TREE:
        est = fit_tree(X, y, n_classes, params.max_depth, params.min_samples_leaf)
    elif algorithm == RANDOM_FOREST:
        est = fit_forest(
            X, y, n_classes, params.n_trees, params.max_depth, params.min_samples_leaf,
            params.feature_fraction, params.bootstrap, params.seed, workers,
        )
    elif algorithm == LINEAR_REGRESSION:
        est = fit_linear(X, y, params.ridge_epsilon)
    else:
        est = fit_priors(y, n_classes) if classification else fit_mean(y)
    return Model(algorithm, dataset.kind, tuple(dataset.schema), tuple(dataset.class_labels), params, est)


def predict(model: Model, features: FeatureVector) -> Prediction:
    model.check_schema(features.schema)
    values, scores = model.predict_matrix(np.asarray(features.values, dtype=float)[None, :])
    if model.kind == REGRESSION:
        return Prediction(float(values[0]))
    row = scores[0]
    return Prediction(model.class_labels[int(values[0])], dict(zip(model.class_labels, map(float, row))))


# -- persistence --------------------------------------------------------------


def _payload(model: Model) -> dict:
    return {
        "algorithm": model.algorithm,
        "kind": model.kind,
        "schema": list(model.schema),
        "schemaHash": model.schema_hash,
        "classLabels": list(model.class_labels),
        "params": asdict(model.params),
        "state": model.estimator.to_state(),
        "encoders": [s.to_dict() for s in model.encoders],
        "vocabulary": model.vocabulary.to_dict() if model.vocabulary is not None else None,
        "meta": model.meta,
    }


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def model_document(model: Model) -> str:
    payload = _payload(model)
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "checksum": hashlib.sha256(_canonical(payload).encode()).hexdigest(),
        "model": payload,
    }
    return _canonical(doc) + "\n"


def save_model(model: Model, path: Union[str, Path, None] = None) -> str:
    """Serialise to a versioned JSON document, optionally writing it to ``path``."""
    text = model_document(model)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_model(source: Union[str, Path]) -> Model:
    """Read a model from a document string or a file path."""
    text = str(source)
    if not text.lstrip().startswith("{"):
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelError("not a model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model version {doc.get('version')!r} (expected {MODEL_VERSION})")
    payload = doc.get("model")
    if hashlib.sha256(_canonical(payload).encode()).hexdigest() != doc.get("checksum"):
        raise ModelError("model document is corrupted (checksum mismatch)")
    try:
        schema = tuple(payload["schema"])
        if schema_hash(schema) != payload["schemaHash"]:
            raise ModelError("model schema does not match its recorded hash")
        algorithm = payload["algorithm"]
        if algorithm not in _ESTIMATORS:
            raise ModelError(f"unknown algorithm {algorithm!r} in model document")
        vocab = payload.get("vocabulary")
        return Model(
            algorithm=algorithm,
            kind=payload["kind"],
            schema=schema,
            class_labels=tuple(payload["classLabels"]),
            params=TrainParams(**payload["params"]),
            estimator=_ESTIMATORS[algorithm].from_state(payload["state"]),
            encoders=tuple(EncoderSpec.from_dict(s) for s in payload.get("encoders", [])),
            vocabulary=Vocabulary.from_dict(vocab) if vocab is not None else None,
            meta=payload.get("meta", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"malformed model document: {exc}") from None
