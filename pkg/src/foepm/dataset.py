"""Labelled prefix datasets built from an event log and an analytic rule."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .encoding import EncoderSpec, PrefixEncoder, Vocabulary, schema_hash
from .events import EventLog, Trace, TracePrefix, is_numeric
from .foe import ast as A
from .foe.printer import rule_text
from .foe.semantics import apply_rule, check_well_defined, prefix_lengths

CLASSIFICATION = "classification"
REGRESSION = "regression"
DATASET_FORMAT = "foepm-dataset"
DATASET_VERSION = 1


class DatasetError(ValueError):
    """The rule cannot produce a usable dataset for this log."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


def task_kind(rule: A.AnalyticRule) -> str:
    return REGRESSION if rule.kind == A.NUMERIC else CLASSIFICATION


@dataclass
class Dataset:
    kind: str
    X: np.ndarray
    y: np.ndarray
    trace_ids: tuple[str, ...]
    ks: np.ndarray
    schema: tuple[str, ...]
    class_labels: tuple = ()
    dropped: int = 0
    warnings: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def schema_hash(self) -> str:
        return schema_hash(self.schema)

    def labels(self) -> list:
        """Targets as values: class labels for classification, reals otherwise."""
        if self.kind == CLASSIFICATION:
            return [self.class_labels[i] for i in self.y]
        return [float(v) for v in self.y]


def _trace_rows(rule, trace: Trace, encoder: PrefixEncoder, k_min: int, k_max: int):
    stats: Counter = Counter()
    rows = []
    dropped = 0
    for k in prefix_lengths(len(trace), k_min, k_max):
        pfx = TracePrefix(trace, k)
        target = apply_rule(rule, pfx, stats)
        if target is None:
            dropped += 1
            continue
        rows.append((k, encoder.encode(pfx, stats), target))
    return rows, dropped, stats


def build_dataset(
    rule: A.AnalyticRule,
    event_log: EventLog,
    specs: Sequence[EncoderSpec],
    vocab: Vocabulary,
    k_min: int = 2,
    k_max: int = -1,
    check: bool = True,
    class_labels: Sequence = (),
    workers: int = 1,
) -> Dataset:
    """Encode and label every prefix of every trace with ``k`` in range.

    Rows whose target is undefined are dropped and counted. Class labels are
    numbered in first-occurrence order, after any ``class_labels`` given.
    Unless ``check`` is false the rule must be well defined on the log.
    """
    if check:
        report = check_well_defined(rule, event_log, k_min, k_max)
        if not report.ok:
            v = report.violations[0]
            raise DatasetError(
                f"rule is not well defined: {len(report.violations)} prefix(es) get conflicting targets, "
                f"first at trace {v.trace_id!r} k={v.k} (conditions {list(v.conditions)})",
                report,
            )
    encoder = PrefixEncoder(specs, vocab)
    kind = task_kind(rule)

    def work(trace):
        return _trace_rows(rule, trace, encoder, k_min, k_max)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trace = list(pool.map(work, event_log.traces))
    else:
        per_trace = [work(t) for t in event_log.traces]

    stats: Counter = Counter()
    X, targets, tids, ks = [], [], [], []
    dropped = 0
    for trace, (rows, d, s) in zip(event_log.traces, per_trace):
        dropped += d
        stats.update(s)
        for k, x, target in rows:
            tids.append(trace.id)
            ks.append(k)
            X.append(x)
            targets.append(target)
    if not targets:
        raise DatasetError(f"empty dataset: no prefix in range has a defined target ({dropped} dropped)")

    labels = list(class_labels)
    if kind == REGRESSION:
        bad = [t for t in targets if not is_numeric(t)]
        if bad:
            raise DatasetError(f"numeric rule produced a non-numeric target {bad[0]!r}")
        y = np.array([float(t) for t in targets])
    else:
        index = {lbl: i for i, lbl in enumerate(labels)}
        codes = []
        for t in targets:
            if t not in index:
                index[t] = len(labels)
                labels.append(t)
            codes.append(index[t])
        y = np.array(codes, dtype=np.int64)
    return Dataset(
        kind=kind,
        X=np.vstack(X) if encoder.width else np.zeros((len(targets), 0)),
        y=y,
        trace_ids=tuple(tids),
        ks=np.array(ks, dtype=np.int64),
        schema=encoder.schema,
        class_labels=tuple(labels),
        dropped=dropped,
        warnings=stats,
    )


def expected_rows(event_log: EventLog, k_min: int = 2, k_max: int = -1) -> int:
    """Number of prefixes in range before undefined targets are dropped."""
    return sum(len(prefix_lengths(len(t), k_min, k_max)) for t in event_log)


# -- splitting ----------------------------------------------------------------

ORDER_KEYS = ("firstEventTimestamp", "logOrder")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 2 / 3
    order_key: str = "firstEventTimestamp"
    timestamp_attribute: str = "time:timestamp"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train fraction must lie strictly between 0 and 1")
        if self.order_key not in ORDER_KEYS:
            raise ValueError(f"unknown split order {self.order_key!r}; expected one of {', '.join(ORDER_KEYS)}")


def _first_timestamp(trace: Trace, name: str) -> float:
    v = trace.events[0].attributes.get(name)
    return float(v) if is_numeric(v) else math.inf


def split_log(event_log: EventLog, spec: SplitSpec = SplitSpec()) -> tuple[EventLog, EventLog]:
    """Whole traces to train/test; the first ``ceil(fraction * N)`` go to train."""
    n = len(event_log)
    if n < 2:
        raise ValueError(f"cannot split a log with {n} trace(s)")
    traces = list(event_log.traces)
    if spec.order_key == "firstEventTimestamp":
        traces.sort(key=lambda t: (_first_timestamp(t, spec.timestamp_attribute), t.id))
    n_train = min(n - 1, math.ceil(spec.train_fraction * n - 1e-9))
    n_train = max(1, n_train)
    return EventLog(tuple(traces[:n_train])), EventLog(tuple(traces[n_train:]))


# -- export -------------------------------------------------------------------


def format_number(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _label_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return format_number(v) if is_numeric(v) else str(v)


def dataset_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trace_id", "k", *ds.schema, "target"])
    for i in range(len(ds)):
        target = _label_text(ds.class_labels[ds.y[i]]) if ds.kind == CLASSIFICATION else format_number(ds.y[i])
        w.writerow([ds.trace_ids[i], int(ds.ks[i]), *(format_number(v) for v in ds.X[i]), target])
    return buf.getvalue()


def dataset_metadata(
    ds: Dataset,
    specs: Sequence[EncoderSpec],
    vocab: Vocabulary,
    rule: Optional[A.AnalyticRule] = None,
) -> dict:
    doc = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "kind": ds.kind,
        "classLabels": list(ds.class_labels),
        "encoders": [s.to_dict() for s in specs],
        "vocabularyHash": vocab.digest(),
        "schemaHash": ds.schema_hash,
        "rows": len(ds),
        "dropped": ds.dropped,
    }
    if rule is not None:
        doc["rule"] = rule_text(rule)
    return doc


def write_dataset(path, ds: Dataset, specs, vocab, rule=None) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and ``path`` + ``.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dataset_csv(ds), encoding="utf-8")
    meta = path.with_name(path.name + ".meta.json")
    meta.write_text(json.dumps(dataset_metadata(ds, specs, vocab, rule), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, meta
