"""Least-squares linear regression via the normal equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LinearModel:
    """``y = intercept + sum(weights * (x - center) / scale)``.

    Columns are centred and scaled before solving so that timestamps in
    milliseconds and 0/1 indicators live on comparable scales.
    """

    weights: np.ndarray
    intercept: float
    center: np.ndarray
    scale: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        """Weights on the raw (unscaled) features."""
        return self.weights / self.scale

    @property
    def raw_intercept(self) -> float:
        return float(self.intercept - self.coefficients @ self.center)

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + ((np.asarray(X, dtype=float) - self.center) / self.scale) @ self.weights

    def to_state(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_state(cls, s: dict) -> "LinearModel":
        return cls(
            np.asarray(s["weights"], dtype=float),
            float(s["intercept"]),
            np.asarray(s["center"], dtype=float),
            np.asarray(s["scale"], dtype=float),
        )


def fit_linear(X: np.ndarray, y: np.ndarray, ridge_epsilon: float = 1e-8) -> LinearModel:
    """Solve ``(Z'Z + eps I) w = Z'(y - mean y)`` on standardised columns ``Z``.

    The small ridge term keeps the system solvable when columns are
    collinear, as one-hot blocks always are. One refinement step with the
    same matrix then removes the shrinkage it causes on well-determined
    directions (iterated Tikhonov), so exact data is fitted to rounding
    error. Constant columns get weight 0.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ValueError("X must be a non-empty 2-d array with one row per target")
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - center) / scale
    y_mean = float(y.mean())
    if not Z.shape[1]:
        return LinearModel(np.zeros(0), y_mean, center, scale)
    zz = Z.T @ Z
    zy = Z.T @ (y - y_mean)
    gram = zz + ridge_epsilon * np.eye(Z.shape[1])
    weights = np.linalg.solve(gram, zy)
    weights = weights + np.linalg.solve(gram, zy - zz @ weights)
    return LinearModel(weights, y_mean, center, scale)
