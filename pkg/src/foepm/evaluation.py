"""Prediction-point evaluation: accuracy/AUC or MAE/RMSE at early, mid, late and all prefixes."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional, Sequence

import numpy as np

from .dataset import CLASSIFICATION, REGRESSION, task_kind
from .encoding import EncoderSpec, PrefixEncoder, Vocabulary
from .events import MS_PER_DAY, EventLog, TracePrefix
from .foe import ast as A
from .foe.semantics import apply_rule, prefix_lengths
from .learners.model import Model, ModelError

SLICES = ("Early", "Mid", "Late", "All")
SLICE_FRACTIONS = {"Early": 0.25, "Mid": 0.5, "Late": 0.75}
ROUNDINGS = ("half_up", "floor", "ceil")


# -- metrics ------------------------------------------------------------------


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc(scores: Sequence[float], labels: Sequence[int]) -> Optional[float]:
    """Area under the ROC curve from the Mann-Whitney rank statistic.

    Equals ``(concordant + 0.5 * tied) / (positives * negatives)`` over all
    positive/negative pairs. Returns ``None`` when only one class occurs.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    rank_sum = average_ranks(scores)[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def multiclass_auc(scores: np.ndarray, labels: Sequence[int]) -> Optional[float]:
    """Macro one-vs-rest AUC over the classes present in ``labels``.

    ``scores[:, c]`` is the score of class ``c``. With exactly two classes
    present this is the binary AUC on the higher class's score. Returns
    ``None`` when fewer than two classes are present.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    present = np.unique(labels)
    if len(present) < 2:
        return None
    if len(present) == 2:
        c = present[1]
        return auc(scores[:, c], labels == c)
    return float(np.mean([auc(scores[:, c], labels == c) for c in present]))


def mae_rmse(predictions: Sequence[float], truths: Sequence[float]) -> tuple[float, float]:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if len(p) != len(t):
        raise ValueError("predictions and truths differ in length")
    if len(p) == 0:
        raise ValueError("no predictions to score")
    err = p - t
    return float(np.mean(np.abs(err))), float(math.sqrt(np.mean(err**2)))


def accuracy(predicted: Sequence[int], truth: Sequence[int]) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if len(truth) == 0:
        raise ValueError("no predictions to score")
    return float(np.mean(predicted == truth))


# -- prediction points --------------------------------------------------------


def _round(x: float, rounding: str) -> int:
    if rounding == "floor":
        return math.floor(x)
    if rounding == "ceil":
        return math.ceil(x)
    if rounding == "half_up":
        return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    raise ValueError(f"unknown rounding {rounding!r}; expected one of {', '.join(ROUNDINGS)}")


def slice_k(n: int, fraction: float, rounding: str = "half_up") -> Optional[int]:
    """Prefix length for a prediction point, clamped to ``[2, n-1]``; None if ``n < 3``."""
    if n < 3:
        return None
    return min(max(_round(n * fraction, rounding), 2), n - 1)


# -- report -------------------------------------------------------------------


@dataclass
class SliceMetrics:
    n: int = 0
    accuracy: Optional[float] = None
    auc: Optional[float] = None
    mae: Optional[float] = None
    rmse: Optional[float] = None


@dataclass
class ReportRow:
    name: str
    slices: dict[str, SliceMetrics]


@dataclass
class MetricsReport:
    kind: str
    rows: list[ReportRow]
    unit: str = "ms"
    skipped_traces: int = 0
    dropped_rows: int = 0
    warnings: Counter = field(default_factory=Counter)

    @property
    def metric_names(self) -> tuple[str, str]:
        return ("accuracy", "auc") if self.kind == CLASSIFICATION else ("mae", "rmse")

    def _scale(self, metric: str) -> float:
        return MS_PER_DAY if self.unit == "days" and metric in ("mae", "rmse") else 1.0

    def value(self, row: str, slice_name: str, metric: str) -> Optional[float]:
        for r in self.rows:
            if r.name == row:
                v = getattr(r.slices[slice_name], metric)
                return None if v is None else v / self._scale(metric)
        raise KeyError(row)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "unit": self.unit if self.kind == REGRESSION else None,
            "skippedTraces": self.skipped_traces,
            "droppedRows": self.dropped_rows,
            "warnings": dict(sorted(self.warnings.items())),
            "rows": [
                {
                    "name": r.name,
                    "slices": {
                        s: {"n": r.slices[s].n, **{m: self.value(r.name, s, m) for m in self.metric_names}}
                        for s in SLICES
                    },
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "slice", "n", *self.metric_names])
        for r in self.rows:
            for s in SLICES:
                vals = [self.value(r.name, s, m) for m in self.metric_names]
                w.writerow([r.name, s, r.slices[s].n, *("" if v is None else repr(v) for v in vals)])
        return buf.getvalue()

    def to_text(self, digits: int = 2) -> str:
        """Aligned table: one row per model, Early/Mid/Late/All per metric."""
        titles = {"accuracy": "Accuracy", "auc": "AUC value", "mae": "MAE", "rmse": "RMSE"}
        unit = f" (in {self.unit})" if self.kind == REGRESSION else ""
        head1 = [""] + [titles[m] + unit for m in self.metric_names for _ in SLICES]
        head2 = [""] + list(SLICES) * 2
        body = []
        for r in self.rows:
            cells = [r.name]
            for m in self.metric_names:
                for s in SLICES:
                    v = self.value(r.name, s, m)
                    cells.append("n/a" if v is None else f"{v:.{digits}f}")
            body.append(cells)
        counts = ["n"] + [str(self.rows[0].slices[s].n) if self.rows else "0" for s in SLICES] * 2
        table = [head2, *body, counts]
        widths = [max(len(row[i]) for row in table) for i in range(len(head2))]
        metric_w = [sum(widths[1 + j * 4 : 5 + j * 4]) + 3 * 3 for j in range(2)]

        def line(cells):
            return " | ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(cells))

        top = " | ".join([" " * widths[0]] + [head1[1 + 4 * j].ljust(metric_w[j]) for j in range(2)])
        rule = "-" * len(line(head2))
        out = [top.rstrip(), line(head2), rule, *(line(b) for b in body), rule, line(counts)]
        if self.skipped_traces:
            out.append(f"skipped traces (fewer than 3 events): {self.skipped_traces}")
        if self.dropped_rows:
            out.append(f"prefixes with undefined target: {self.dropped_rows}")
        return "\n".join(out) + "\n"


# -- evaluation ---------------------------------------------------------------


@dataclass
class TestRows:
    """Encoded test prefixes with ground truth from the rule."""

    X: np.ndarray
    truth: list
    trace_ids: list[str]
    ks: np.ndarray
    slice_masks: dict[str, np.ndarray]
    skipped_traces: int
    dropped_rows: int
    warnings: Counter


def collect_test_rows(
    rule: A.AnalyticRule,
    test_log: EventLog,
    specs: Sequence[EncoderSpec],
    vocab: Vocabulary,
    rounding: str = "half_up",
    k_min: int = 2,
    k_max: int = -1,
) -> TestRows:
    encoder = PrefixEncoder(specs, vocab)
    stats: Counter = Counter()
    X, truth, tids, ks, tags = [], [], [], [], []
    skipped = dropped = 0
    for trace in test_log:
        n = len(trace)
        if n < 3:
            skipped += 1
            continue
        points = {name: slice_k(n, q, rounding) for name, q in SLICE_FRACTIONS.items()}
        for k in prefix_lengths(n, k_min, k_max):
            pfx = TracePrefix(trace, k)
            target = apply_rule(rule, pfx, stats)
            if target is None:
                dropped += 1
                continue
            X.append(encoder.encode(pfx, stats))
            truth.append(target)
            tids.append(trace.id)
            ks.append(k)
            tags.append({name for name, pk in points.items() if pk == k})
    X_arr = np.vstack(X) if X else np.zeros((0, encoder.width))
    masks = {name: np.array([name in t for t in tags], dtype=bool) for name in SLICE_FRACTIONS}
    masks["All"] = np.ones(len(truth), dtype=bool)
    return TestRows(X_arr, truth, tids, np.array(ks, dtype=np.int64), masks, skipped, dropped, stats)


def _slice_metrics(kind, mask, pred, scores, truth_codes, truth_values) -> SliceMetrics:
    n = int(mask.sum())
    if n == 0:
        return SliceMetrics(0)
    if kind == REGRESSION:
        mae, rmse = mae_rmse(pred[mask], truth_values[mask])
        return SliceMetrics(n, mae=mae, rmse=rmse)
    return SliceMetrics(
        n, accuracy=accuracy(pred[mask], truth_codes[mask]), auc=multiclass_auc(scores[mask], truth_codes[mask])
    )


def score_rows(model: Model, rows: TestRows) -> dict[str, SliceMetrics]:
    pred, scores = model.predict_matrix(rows.X)
    if model.kind == REGRESSION:
        truth_values = np.array([float(t) for t in rows.truth])
        truth_codes = None
    else:
        # labels the model never saw get their own index with a zero score column
        labels = list(model.class_labels)
        index = {lbl: i for i, lbl in enumerate(labels)}
        for t in rows.truth:
            if t not in index:
                index[t] = len(labels)
                labels.append(t)
        truth_codes = np.array([index[t] for t in rows.truth], dtype=np.int64)
        extra = len(labels) - len(model.class_labels)
        if extra:
            scores = np.hstack([scores, np.zeros((len(scores), extra))])
        truth_values = None
    return {s: _slice_metrics(model.kind, rows.slice_masks[s], pred, scores, truth_codes, truth_values) for s in SLICES}


def evaluate(
    models: Sequence[tuple[str, Model]] | Model,
    rule: A.AnalyticRule,
    test_log: EventLog,
    specs: Optional[Sequence[EncoderSpec]] = None,
    vocab: Optional[Vocabulary] = None,
    rounding: str = "half_up",
    unit: str = "ms",
    k_min: int = 2,
    k_max: int = -1,
) -> MetricsReport:
    """Score one or more models on every prefix ``2 <= k < |trace|`` of the test log.

    Ground truth is recomputed with the rule on the full test traces. Encoder
    specs and vocabulary default to the ones stored in the first model.
    """
    if isinstance(models, Model):
        models = [(models.algorithm, models)]
    if not models:
        raise ValueError("nothing to evaluate")
    first = models[0][1]
    specs = first.encoders if specs is None else tuple(specs)
    vocab = first.vocabulary if vocab is None else vocab
    if vocab is None:
        raise ModelError("model carries no vocabulary; pass encoder specs and vocabulary explicitly")
    kind = task_kind(rule)
    schema = PrefixEncoder(specs, vocab).schema
    for name, m in models:
        if m.kind != kind:
            raise ModelError(f"model {name!r} is a {m.kind} model but the rule needs {kind}")
        m.check_schema(schema)
    if unit not in ("ms", "days"):
        raise ValueError("unit must be 'ms' or 'days'")
    rows = collect_test_rows(rule, test_log, specs, vocab, rounding, k_min, k_max)
    if len(rows.truth) == 0:
        raise ValueError("test log has no prefix with a defined target")
    report_rows = [ReportRow(name, score_rows(m, rows)) for name, m in models]
    return MetricsReport(kind, report_rows, unit, rows.skipped_traces, rows.dropped_rows, rows.warnings)
