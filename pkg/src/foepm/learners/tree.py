"""CART decision trees (Gini impurity / variance reduction).

The tree is kept in flat arrays: ``feature[node] == -1`` marks a leaf, rows
with ``x[feature] <= threshold`` go to ``left``. Leaves store class counts
(classification) or the mean target (regression) in ``value``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

_MIN_GAIN = 1e-12


@dataclass
class DecisionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (nodes, n_classes) counts, or (nodes, 1) means

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaves(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        """Regression: leaf means."""
        return self.value[self.leaves(X), 0]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Classification: leaf class frequencies."""
        counts = self.value[self.leaves(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def to_state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, s: dict) -> "DecisionTree":
        return cls(
            np.asarray(s["feature"], dtype=np.int64),
            np.asarray(s["threshold"], dtype=float),
            np.asarray(s["left"], dtype=np.int64),
            np.asarray(s["right"], dtype=np.int64),
            np.asarray(s["value"], dtype=float).reshape(len(s["feature"]), -1),
        )


def _split_scores_classification(onehot_sorted):
    """Score of every cut position along one sorted feature.

    The score is ``sum(c_l^2)/n_l + sum(c_r^2)/n_r``, which grows as the
    weighted Gini impurity of the children shrinks.
    """
    n = len(onehot_sorted)
    left = np.cumsum(onehot_sorted, axis=0)[:-1]
    total = left[-1] + onehot_sorted[-1]
    right = total - left
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    score = (left**2).sum(axis=1) / n_left + (right**2).sum(axis=1) / n_right
    return score


def _split_scores_regression(y_sorted):
    """``S_l^2/n_l + S_r^2/n_r``; grows as the children's squared error shrinks."""
    n = len(y_sorted)
    s_left = np.cumsum(y_sorted)[:-1]
    total = s_left[-1] + y_sorted[-1]
    n_left = np.arange(1, n, dtype=float)
    return s_left**2 / n_left + (total - s_left) ** 2 / (n - n_left)


class _Builder:
    def __init__(self, X, y, n_classes, max_depth, min_samples_leaf, max_features, rng):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_leaf = min_samples_leaf
        self.max_features = max_features
        self.rng = rng
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        if n_classes:
            self.onehot = np.eye(n_classes)[y]

    def leaf_value(self, rows):
        if self.n_classes:
            return np.bincount(self.y[rows], minlength=self.n_classes).astype(float)
        return np.array([self.y[rows].mean()])

    def new_node(self, rows) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(self.leaf_value(rows))
        return len(self.feature) - 1

    def candidate_features(self) -> np.ndarray:
        p = self.X.shape[1]
        if self.max_features is None or self.max_features >= p:
            return np.arange(p)
        return np.sort(self.rng.choice(p, size=self.max_features, replace=False))

    def find_split(self, rows):
        n = len(rows)
        if n < 2 * self.min_leaf:
            return None
        if self.n_classes:
            counts = np.bincount(self.y[rows], minlength=self.n_classes).astype(float)
            if np.count_nonzero(counts) <= 1:
                return None
            parent = (counts**2).sum() / n
            scale = parent
            targets = self.onehot[rows]
        else:
            yr = self.y[rows] - self.y[rows].mean()
            scale = float((yr**2).sum())
            if scale == 0:
                return None
            parent = 0.0  # centred targets: (sum y)^2 / n == 0
        best = None
        lo, hi = self.min_leaf - 1, n - self.min_leaf - 1  # cut after sorted position lo..hi
        for f in self.candidate_features():
            x = self.X[rows, f]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            if xs[0] == xs[-1]:
                continue
            if self.n_classes:
                score = _split_scores_classification(targets[order])
            else:
                score = _split_scores_regression(yr[order])
            valid = np.zeros(n - 1, dtype=bool)
            valid[lo : hi + 1] = True
            valid &= xs[1:] > xs[:-1]
            if not valid.any():
                continue
            cand = np.where(valid, score - parent, -np.inf)
            pos = int(np.argmax(cand))  # first maximum: lowest threshold
            gain = cand[pos]
            if gain <= _MIN_GAIN * scale:
                continue
            if best is None or gain > best[0] * (1 + 1e-12) + 1e-300:
                thr = (xs[pos] + xs[pos + 1]) / 2.0
                if not thr < xs[pos + 1]:
                    thr = xs[pos]
                best = (gain, int(f), float(thr))
        return best

    def build(self) -> DecisionTree:
        root_rows = np.arange(len(self.y))
        stack = [(self.new_node(root_rows), root_rows, 0)]
        while stack:
            node, rows, depth = stack.pop()
            if depth >= self.max_depth:
                continue
            split = self.find_split(rows)
            if split is None:
                continue
            _, f, thr = split
            mask = self.X[rows, f] <= thr
            lrows, rrows = rows[mask], rows[~mask]
            self.feature[node] = f
            self.threshold[node] = thr
            self.left[node] = self.new_node(lrows)
            self.right[node] = self.new_node(rrows)
            # right pushed first so the left subtree is expanded first
            stack.append((self.right[node], rrows, depth + 1))
            stack.append((self.left[node], lrows, depth + 1))
        return DecisionTree(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=float),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.vstack(self.value),
        )


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int = 0,
    max_depth: int = 12,
    min_samples_leaf: int = 5,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DecisionTree:
    """Grow a CART tree; ``n_classes == 0`` means regression.

    Splits are searched exhaustively at midpoints between consecutive
    distinct values. Among equally good splits the lowest feature index and
    then the lowest threshold win. A node becomes a leaf when no split
    strictly improves the criterion.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ValueError("X must be a non-empty 2-d array with one row per target")
    if max_depth < 0 or min_samples_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_samples_leaf >= 1")
    y = np.asarray(y, dtype=np.int64 if n_classes else float)
    if max_features is not None and rng is None:
        raise ValueError("feature subsampling needs a random generator")
    return _Builder(X, y, n_classes, max_depth, min_samples_leaf, max_features, rng).build()
