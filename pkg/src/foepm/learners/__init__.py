"""Prediction functions: CART trees, random forests, linear regression, baselines."""

from .model import (
    ALGORITHMS,
    DECISION_TREE,
    LINEAR_REGRESSION,
    MEAN_BASELINE,
    RANDOM_FOREST,
    Model,
    ModelError,
    Prediction,
    TrainParams,
    load_model,
    predict,
    save_model,
    train,
)

__all__ = [
    "ALGORITHMS",
    "DECISION_TREE",
    "LINEAR_REGRESSION",
    "MEAN_BASELINE",
    "RANDOM_FOREST",
    "Model",
    "ModelError",
    "Prediction",
    "TrainParams",
    "load_model",
    "predict",
    "save_model",
    "train",
]
