"""Random forests of CART trees with bootstrap rows and per-split feature subsets."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tree import DecisionTree, fit_tree


def n_split_features(n_features: int, fraction: Optional[float]) -> int:
    """Features tried at each split: ``fraction * p``, or ``round(sqrt(p))`` by default."""
    if n_features == 0:
        return 0
    if fraction is None:
        m = round(math.sqrt(n_features))
    else:
        m = math.ceil(fraction * n_features)
    return max(1, min(n_features, m))


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    n_classes: int

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return np.mean([t.predict_value(X) for t in self.trees], axis=0)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Vote fractions; each tree votes for its most frequent leaf class."""
        votes = np.zeros((len(X), self.n_classes))
        rows = np.arange(len(X))
        for t in self.trees:
            # argmax returns the first maximum, so ties go to the lower class index
            votes[rows, np.argmax(t.predict_proba(X), axis=1)] += 1.0
        return votes / len(self.trees)

    def to_state(self) -> dict:
        return {"n_classes": self.n_classes, "trees": [t.to_state() for t in self.trees]}

    @classmethod
    def from_state(cls, s: dict) -> "RandomForest":
        return cls([DecisionTree.from_state(t) for t in s["trees"]], int(s["n_classes"]))


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int = 0,
    n_trees: int = 100,
    max_depth: int = 12,
    min_samples_leaf: int = 5,
    feature_fraction: Optional[float] = None,
    bootstrap: bool = True,
    seed: int = 42,
    workers: int = 1,
) -> RandomForest:
    """Tree ``t`` draws from its own stream ``default_rng([seed, t])``.

    The result does not depend on ``workers``: trees are collected in index
    order whatever the scheduling.
    """
    if n_trees < 1:
        raise ValueError("a forest needs at least one tree")
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    m = n_split_features(p, feature_fraction)

    def grow(t: int) -> DecisionTree:
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        return fit_tree(X[rows], y[rows], n_classes, max_depth, min_samples_leaf, m, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(grow, range(n_trees)))
    else:
        trees = [grow(t) for t in range(n_trees)]
    return RandomForest(trees, n_classes)
