"""Fixed-width feature encodings of trace prefixes.

Four encoder kinds are available:

``oneHotLast``
    one-hot vector of the k-th event's attribute value;
``oneHotCounts``
    occurrence count of every vocabulary value over events ``1..k``;
``attributeLast``
    the k-th event's value as a single real: numbers pass through, other
    values map to their 1-based vocabulary index, unknown or missing give 0;
``timeFeatures``
    time since midnight, since the previous event and since the start of
    the week (Monday 00:00 UTC), all in milliseconds.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .events import AttrValue, EventLog, TracePrefix, is_numeric

ONE_HOT_LAST = "oneHotLast"
ONE_HOT_COUNTS = "oneHotCounts"
ATTRIBUTE_LAST = "attributeLast"
TIME_FEATURES = "timeFeatures"
ENCODER_KINDS = (ONE_HOT_LAST, ONE_HOT_COUNTS, ATTRIBUTE_LAST, TIME_FEATURES)

DAY_MS = 86_400_000
WEEK_MS = 7 * DAY_MS
# the epoch fell on a Thursday, three days after the week's Monday start
_WEEK_OFFSET_MS = 3 * DAY_MS


@dataclass(frozen=True)
class EncoderSpec:
    kind: str
    attribute: Optional[str] = None
    id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ValueError(f"unknown encoder kind {self.kind!r}; expected one of {', '.join(ENCODER_KINDS)}")
        if self.kind == TIME_FEATURES and self.attribute is None:
            object.__setattr__(self, "attribute", "time:timestamp")
        if not self.attribute:
            raise ValueError(f"encoder {self.kind} needs an attribute name")
        if self.id is None:
            object.__setattr__(self, "id", f"{self.kind}:{self.attribute}")

    @property
    def uses_vocabulary(self) -> bool:
        return self.kind != TIME_FEATURES

    def to_dict(self) -> dict:
        return {"kind": self.kind, "attribute": self.attribute, "id": self.id}

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderSpec":
        unknown = set(d) - {"kind", "attribute", "id"}
        if unknown:
            raise ValueError(f"unknown encoder field(s): {', '.join(sorted(unknown))}")
        return cls(d["kind"], d.get("attribute"), d.get("id"))


def check_specs(specs: Sequence[EncoderSpec]) -> None:
    ids = [s.id for s in specs]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValueError(f"duplicate encoder id(s): {', '.join(dupes)}")


def _key(value: AttrValue):
    # bool must not collide with 1/0, and numbers of any subtype compare by value
    if isinstance(value, bool):
        return ("b", value)
    if is_numeric(value):
        return ("n", float(value))
    return ("s", value)


@dataclass
class Vocabulary:
    """Distinct observed values per encoder id, in first-occurrence order."""

    values: dict[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {sid: {_key(v): i for i, v in enumerate(vals, start=1)} for sid, vals in self.values.items()}

    def index(self, spec_id: str, value: AttrValue) -> int:
        """1-based index of ``value``, or 0 when it is unknown or undefined."""
        if value is None:
            return 0
        return self._index.get(spec_id, {}).get(_key(value), 0)

    def size(self, spec_id: str) -> int:
        return len(self.values.get(spec_id, ()))

    def to_dict(self) -> dict:
        return {sid: list(vals) for sid, vals in self.values.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls({sid: tuple(vals) for sid, vals in d.items()})

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def fit_vocabulary(log: EventLog, specs: Sequence[EncoderSpec]) -> Vocabulary:
    check_specs(specs)
    values: dict[str, tuple] = {}
    for spec in specs:
        if not spec.uses_vocabulary:
            continue
        seen: dict = {}
        for trace in log:
            for event in trace.events:
                v = event.attributes.get(spec.attribute)
                if v is None:
                    continue
                if spec.kind == ATTRIBUTE_LAST and is_numeric(v):
                    continue
                seen.setdefault(_key(v), v)
        values[spec.id] = tuple(seen.values())
    return Vocabulary(values)


def _value_label(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if is_numeric(v):
        return repr(float(v))
    return str(v)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise ValueError("feature vector length does not match its schema")


class PrefixEncoder:
    """Encodes prefixes for a fixed list of specs and a fitted vocabulary."""

    def __init__(self, specs: Sequence[EncoderSpec], vocab: Vocabulary):
        check_specs(specs)
        self.specs = tuple(specs)
        self.vocab = vocab
        names: list[str] = []
        for spec in self.specs:
            if spec.kind in (ONE_HOT_LAST, ONE_HOT_COUNTS):
                names.extend(f"{spec.id}={_value_label(v)}" for v in vocab.values.get(spec.id, ()))
            elif spec.kind == ATTRIBUTE_LAST:
                names.append(spec.id)
            else:
                names.extend(f"{spec.id}.{part}" for part in ("sinceMidnight", "sincePrevious", "sinceWeekStart"))
        self.schema = tuple(names)
        self.width = len(names)

    def encode(self, pfx: TracePrefix, stats: Optional[Counter] = None) -> np.ndarray:
        out = np.zeros(self.width)
        pos = 0
        events = pfx.trace.events
        k = pfx.k
        last = events[k - 1].attributes
        for spec in self.specs:
            if spec.kind == ONE_HOT_LAST:
                idx = self.vocab.index(spec.id, last.get(spec.attribute))
                if idx:
                    out[pos + idx - 1] = 1.0
                elif last.get(spec.attribute) is not None and stats is not None:
                    stats["unseen categorical value"] += 1
                pos += self.vocab.size(spec.id)
            elif spec.kind == ONE_HOT_COUNTS:
                for ev in events[:k]:
                    idx = self.vocab.index(spec.id, ev.attributes.get(spec.attribute))
                    if idx:
                        out[pos + idx - 1] += 1.0
                pos += self.vocab.size(spec.id)
            elif spec.kind == ATTRIBUTE_LAST:
                v = last.get(spec.attribute)
                if is_numeric(v):
                    out[pos] = float(v)
                elif v is not None:
                    idx = self.vocab.index(spec.id, v)
                    out[pos] = float(idx)
                    if not idx and stats is not None:
                        stats["unseen categorical value"] += 1
                pos += 1
            else:
                ts = last.get(spec.attribute)
                if is_numeric(ts):
                    t = float(ts)
                    out[pos] = t % DAY_MS
                    out[pos + 2] = (t + _WEEK_OFFSET_MS) % WEEK_MS
                    if k > 1:
                        prev = events[k - 2].attributes.get(spec.attribute)
                        if is_numeric(prev):
                            out[pos + 1] = t - float(prev)
                pos += 3
        return out

    def encode_vector(self, pfx: TracePrefix, stats: Optional[Counter] = None) -> FeatureVector:
        return FeatureVector(self.encode(pfx, stats), self.schema)


def encode_prefix(pfx: TracePrefix, specs: Sequence[EncoderSpec], vocab: Vocabulary) -> FeatureVector:
    return PrefixEncoder(specs, vocab).encode_vector(pfx)


def schema_hash(schema: Iterable[str]) -> str:
    blob = json.dumps(list(schema), separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
