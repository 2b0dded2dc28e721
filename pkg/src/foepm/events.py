"""Event-log data model and ingestion from XES and CSV.

Attribute values are plain Python objects:

* ``str`` for literals, ``bool`` for booleans,
* ``int`` / ``float`` for numbers,
* :class:`Timestamp` (a ``float`` subclass holding milliseconds since the
  Unix epoch) for dates,
* ``None`` for an undefined value.

All public indexing is 1-based.
"""

from __future__ import annotations

import csv
import io
import logging
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Any, Iterable, Iterator, Mapping, Sequence, Union

log = logging.getLogger(__name__)

MS_PER_DAY = 86_400_000
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class Timestamp(float):
    """Milliseconds since the Unix epoch.

    Behaves as a float in arithmetic; the subclass only remembers that the
    value came from a date so it can be written back as one.
    """

    def __repr__(self) -> str:
        return f"Timestamp({float(self)!r})"

    def isoformat(self) -> str:
        return format_timestamp(self)


AttrValue = Union[str, bool, int, float, Timestamp, None]


def is_numeric(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class LogFormatError(ValueError):
    """Raised when an event log cannot be read."""


# -- timestamps ---------------------------------------------------------------

_ISO_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})"
    r"(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:[.,](\d+))?)?)?"
    r"\s*(Z|[+-]\d{2}(?::?\d{2})?)?$"
)


def parse_iso8601(text: str) -> Timestamp:
    """Parse an ISO-8601 date/time into epoch milliseconds.

    Accepts fractional seconds of any precision (truncated to milliseconds)
    and ``Z`` / ``+hh:mm`` / ``+hhmm`` / ``+hh`` offsets. A value without an
    offset is taken as UTC.
    """
    m = _ISO_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an ISO-8601 timestamp: {text!r}")
    year, month, day, hh, mm, ss, frac, zone = m.groups()
    micro = int((frac or "0")[:6].ljust(6, "0"))
    tz = timezone.utc
    if zone and zone != "Z":
        sign = -1 if zone[0] == "-" else 1
        digits = zone[1:].replace(":", "")
        offset = timedelta(hours=int(digits[:2]), minutes=int(digits[2:4] or 0))
        tz = timezone(sign * offset)
    dt = datetime(int(year), int(month), int(day), int(hh or 0), int(mm or 0),
                  int(ss or 0), micro, tzinfo=tz)
    delta = dt - _EPOCH
    ms = delta.days * MS_PER_DAY + delta.seconds * 1000 + delta.microseconds // 1000
    return Timestamp(ms)


def format_timestamp(ms: float) -> str:
    dt = _EPOCH + timedelta(milliseconds=int(ms))
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}+00:00"


# -- data model ---------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    attributes: Mapping[str, AttrValue] = field(default_factory=dict)

    def get(self, name: str) -> AttrValue:
        return self.attributes.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.attributes


@dataclass(frozen=True)
class Trace:
    id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError(f"trace {self.id!r} has no events")
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def event(self, i: int) -> Event:
        """The event at 1-based position ``i``."""
        if not 1 <= i <= len(self.events):
            raise IndexError(f"event index {i} outside 1..{len(self.events)}")
        return self.events[i - 1]

    def prefix(self, k: int) -> "TracePrefix":
        return prefix(self, k)


@dataclass(frozen=True)
class TracePrefix:
    """The first ``k`` events of ``trace``.

    The parent trace stays reachable: conditions quantify over the whole
    trace, not just the exposed events.
    """

    trace: Trace
    k: int

    def __post_init__(self):
        n = len(self.trace)
        if not 1 <= self.k <= n:
            raise ValueError(f"prefix length {self.k} outside 1..{n} for trace {self.trace.id!r}")

    @property
    def curr(self) -> int:
        return self.k

    @property
    def last(self) -> int:
        return len(self.trace)

    @property
    def events(self) -> tuple[Event, ...]:
        return self.trace.events[: self.k]

    def __len__(self) -> int:
        return self.k


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    parse_warnings: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.traces, tuple):
            object.__setattr__(self, "traces", tuple(self.traces))
        seen = set()
        for t in self.traces:
            if t.id in seen:
                raise ValueError(f"duplicate trace id {t.id!r}")
            seen.add(t.id)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def trace(self, trace_id: str) -> Trace:
        for t in self.traces:
            if t.id == trace_id:
                return t
        raise KeyError(trace_id)

    @property
    def n_events(self) -> int:
        return sum(len(t) for t in self.traces)


def attr(event: Event, name: str) -> AttrValue:
    """Attribute value of ``event``; ``None`` when absent."""
    return event.attributes.get(name)


def prefix(trace: Trace, k: int) -> TracePrefix:
    return TracePrefix(trace, k)


# -- XES ----------------------------------------------------------------------

_XES_KINDS = {"string", "date", "int", "float", "boolean"}
_XES_STRUCTURAL = {"extension", "global", "classifier", "log", "trace", "event"}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _read_attribute(el: ET.Element, where: str) -> AttrValue:
    kind = _local(el.tag)
    raw = el.get("value")
    if raw is None:
        raise LogFormatError(f"{where}: <{kind}> without a value")
    if kind == "string":
        return raw
    if kind == "date":
        try:
            return parse_iso8601(raw)
        except ValueError:
            raise LogFormatError(f"{where}: unparseable date {raw!r}") from None
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if raw.strip().lower() not in ("true", "false"):
        raise LogFormatError(f"{where}: unparseable boolean {raw!r}")
    return raw.strip().lower() == "true"


def _read_attributes(el: ET.Element, where: str, warnings: Counter) -> dict[str, AttrValue]:
    out = {}
    for child in el:
        kind = _local(child.tag)
        if kind in _XES_KINDS:
            out[child.get("key")] = _read_attribute(child, where)
        elif kind not in _XES_STRUCTURAL:
            warnings[f"skipped <{kind}> attribute"] += 1
    return out


def parse_xes(source: Union[str, bytes, IO[bytes]]) -> EventLog:
    """Read the supported XES subset.

    ``source`` is a path, raw bytes, or a binary stream. Attribute kinds
    other than string/date/int/float/boolean are skipped and counted in
    ``parse_warnings``.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogFormatError(f"malformed XML at line {line}, column {col}: {exc}") from None
    warnings: Counter = Counter()
    traces = []
    seen: Counter = Counter()
    for t_num, t_el in enumerate((c for c in root if _local(c.tag) == "trace"), start=1):
        t_attrs = _read_attributes(t_el, f"trace #{t_num}", warnings)
        trace_id = str(t_attrs.get("concept:name", f"trace-{t_num}"))
        events = []
        for e_num, e_el in enumerate((c for c in t_el if _local(c.tag) == "event"), start=1):
            where = f"trace {trace_id!r}, event #{e_num}"
            events.append(Event(_read_attributes(e_el, where, warnings)))
        if not events:
            warnings["skipped empty trace"] += 1
            continue
        seen[trace_id] += 1
        if seen[trace_id] > 1:
            warnings["renamed duplicate trace id"] += 1
            trace_id = f"{trace_id}#{seen[trace_id]}"
        traces.append(Trace(trace_id, tuple(events)))
    for what, n in warnings.items():
        log.warning("XES: %s (%d)", what, n)
    return EventLog(tuple(traces), dict(warnings))


def _xes_attribute(parent: ET.Element, key: str, value: AttrValue) -> None:
    if value is None:
        return
    if isinstance(value, bool):
        ET.SubElement(parent, "boolean", key=key, value="true" if value else "false")
    elif isinstance(value, Timestamp):
        ET.SubElement(parent, "date", key=key, value=format_timestamp(value))
    elif isinstance(value, int):
        ET.SubElement(parent, "int", key=key, value=str(value))
    elif isinstance(value, float):
        ET.SubElement(parent, "float", key=key, value=repr(value))
    else:
        ET.SubElement(parent, "string", key=key, value=str(value))


def write_xes(event_log: EventLog) -> bytes:
    """Serialize to the XES subset read by :func:`parse_xes`."""
    root = ET.Element("log", {"xes.version": "1.0"})
    for t in event_log:
        t_el = ET.SubElement(root, "trace")
        _xes_attribute(t_el, "concept:name", t.id)
        for e in t.events:
            e_el = ET.SubElement(t_el, "event")
            for key, value in e.attributes.items():
                _xes_attribute(e_el, key, value)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


# -- CSV ----------------------------------------------------------------------

CSV_TYPES = ("string", "number", "timestamp", "bool")


@dataclass
class CsvMapping:
    """How CSV columns map onto event attributes.

    ``columns`` maps a column header to one of :data:`CSV_TYPES`; headers not
    listed are read as strings. ``timestamp_format`` is ``"iso"``,
    ``"epoch_ms"``, ``"epoch_s"`` or a :func:`~datetime.datetime.strptime`
    pattern (interpreted as UTC).
    """

    trace_id: str
    columns: dict[str, str] = field(default_factory=dict)
    timestamp_column: str | None = None
    timestamp_format: str = "iso"
    delimiter: str = ","

    def __post_init__(self):
        for name, kind in self.columns.items():
            if kind not in CSV_TYPES:
                raise ValueError(f"column {name!r}: unknown type {kind!r}")
        if self.timestamp_column:
            self.columns.setdefault(self.timestamp_column, "timestamp")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "CsvMapping":
        return cls(
            trace_id=doc["trace_id"],
            columns=dict(doc.get("columns", {})),
            timestamp_column=doc.get("timestamp_column"),
            timestamp_format=doc.get("timestamp_format", "iso"),
            delimiter=doc.get("delimiter", ","),
        )


def _parse_timestamp_cell(text: str, fmt: str) -> Timestamp:
    if fmt == "iso":
        return parse_iso8601(text)
    if fmt == "epoch_ms":
        return Timestamp(float(text))
    if fmt == "epoch_s":
        return Timestamp(float(text) * 1000.0)
    dt = datetime.strptime(text, fmt)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - _EPOCH
    return Timestamp(delta.days * MS_PER_DAY + delta.seconds * 1000 + delta.microseconds // 1000)


def _parse_cell(text: str, kind: str, mapping: CsvMapping) -> AttrValue:
    if kind == "string":
        return text
    if kind == "number":
        value = float(text)
        return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value
    if kind == "timestamp":
        return _parse_timestamp_cell(text, mapping.timestamp_format)
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(text)


def parse_csv_log(source: Union[str, bytes, IO], mapping: CsvMapping) -> EventLog:
    """Read a CSV event log, one event per row.

    Rows are grouped by the trace-id column in order of first appearance.
    Within a trace, events are sorted by the timestamp column when one is
    declared (stable, undefined timestamps last), otherwise kept in file
    order. Cells that do not parse under their declared type become
    undefined and are counted in ``parse_warnings``; rows without a trace id
    are rejected.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        with open(source, encoding="utf-8-sig", newline="") as fh:
            text = fh.read()
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    reader = csv.DictReader(io.StringIO(text, newline=""), delimiter=mapping.delimiter)
    header = reader.fieldnames or []
    required = [mapping.trace_id, *mapping.columns]
    missing = [c for c in required if c not in header]
    if missing:
        raise LogFormatError(f"CSV is missing declared column(s): {', '.join(missing)}")

    warnings: Counter = Counter()
    groups: dict[str, list[dict[str, AttrValue]]] = {}
    for row in reader:
        case = (row.get(mapping.trace_id) or "").strip()
        if not case:
            warnings["rejected row without trace id"] += 1
            continue
        attrs: dict[str, AttrValue] = {}
        for col in header:
            if col == mapping.trace_id:
                continue
            cell = row.get(col)
            if cell is None or cell == "":
                continue
            kind = mapping.columns.get(col, "string")
            try:
                attrs[col] = _parse_cell(cell, kind, mapping)
            except ValueError:
                warnings[f"unparseable {kind} in column {col!r}"] += 1
        groups.setdefault(case, []).append(attrs)

    traces = []
    ts_col = mapping.timestamp_column
    for case, rows in groups.items():
        if ts_col:
            rows = sorted(rows, key=lambda a: (a.get(ts_col) is None, a.get(ts_col) or 0.0))
        traces.append(Trace(case, tuple(Event(a) for a in rows)))
    for what, n in warnings.items():
        log.warning("CSV: %s (%d)", what, n)
    return EventLog(tuple(traces), dict(warnings))


def read_log(path: str, fmt: str | None = None, csv_mapping: CsvMapping | None = None) -> EventLog:
    """Read a log file, choosing the parser by ``fmt`` or file extension."""
    fmt = fmt or ("csv" if path.lower().endswith(".csv") else "xes")
    if fmt == "xes":
        return parse_xes(path)
    if fmt == "csv":
        if csv_mapping is None:
            raise ValueError("CSV logs need a column mapping")
        return parse_csv_log(path, csv_mapping)
    raise ValueError(f"unknown log format {fmt!r}")


def make_log(traces: Iterable[tuple[str, Sequence[Mapping[str, AttrValue]]]]) -> EventLog:
    """Build a log from ``(trace_id, [attribute dicts])`` pairs."""
    return EventLog(tuple(Trace(tid, tuple(Event(dict(a)) for a in evs)) for tid, evs in traces))
