"""Constant predictors: the training mean, or the class priors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConstantModel:
    value: float = 0.0
    priors: tuple[float, ...] = ()

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return np.full(len(X), self.value)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.tile(np.asarray(self.priors, dtype=float), (len(X), 1))

    def to_state(self) -> dict:
        return {"value": self.value, "priors": list(self.priors)}

    @classmethod
    def from_state(cls, s: dict) -> "ConstantModel":
        return cls(float(s["value"]), tuple(float(p) for p in s["priors"]))


def fit_mean(y: np.ndarray) -> ConstantModel:
    return ConstantModel(value=float(np.mean(y)))


def fit_priors(y: np.ndarray, n_classes: int) -> ConstantModel:
    counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=n_classes)
    return ConstantModel(priors=tuple(float(c) for c in counts / counts.sum()))
