import io

import pytest
from hypothesis import given, settings, strategies as st

from foepm.events import (
    CsvMapping,
    Event,
    EventLog,
    LogFormatError,
    Timestamp,
    Trace,
    TracePrefix,
    attr,
    make_log,
    parse_csv_log,
    parse_iso8601,
    parse_xes,
    prefix,
    read_log,
    write_xes,
)

TWO_EVENTS = b"""<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <trace>
    <string key="concept:name" value="T1"/>
    <event><string key="concept:name" value="a"/><string key="org:group" value="G1"/></event>
    <event><string key="concept:name" value="b"/></event>
  </trace>
</log>
"""


def test_xes_structure():
    log = parse_xes(TWO_EVENTS)
    assert len(log) == 1
    t = log.traces[0]
    assert t.id == "T1" and len(t) == 2
    assert [attr(e, "concept:name") for e in t.events] == ["a", "b"]


def test_missing_attribute_is_undefined():
    t = parse_xes(TWO_EVENTS).traces[0]
    assert attr(t.event(1), "org:group") == "G1"
    assert attr(t.event(2), "org:group") is None
    assert attr(Event({}), "impact") is None
    assert attr(Event({"cost": 3.5}), "cost") == 3.5


def test_date_to_epoch_ms():
    doc = b'<log><trace><event><date key="time:timestamp" value="1970-01-01T00:00:01Z"/></event></trace></log>'
    ts = attr(parse_xes(doc).traces[0].event(1), "time:timestamp")
    assert isinstance(ts, Timestamp) and ts == 1000


@pytest.mark.parametrize(
    "text, ms",
    [
        ("1970-01-01T00:00:00.123Z", 123),
        ("1970-01-01T01:00:00+01:00", 0),
        ("1970-01-01T00:00:00-0030", 1_800_000),
        ("1970-01-02", 86_400_000),
        ("2013-01-07T08:00:00.5+00:00", 1_357_545_600_500),
    ],
)
def test_iso8601(text, ms):
    assert parse_iso8601(text) == ms


def test_typed_attributes():
    doc = b"""<log><trace><event>
      <int key="n" value="3"/><float key="x" value="2.5"/><boolean key="ok" value="TRUE"/>
      <list key="skip"/><id key="u" value="x"/>
    </event></trace></log>"""
    log = parse_xes(doc)
    e = log.traces[0].event(1)
    assert e.get("n") == 3 and isinstance(e.get("n"), int)
    assert e.get("x") == 2.5
    assert e.get("ok") is True
    assert "skip" not in e and "u" not in e
    assert log.parse_warnings == {"skipped <list> attribute": 1, "skipped <id> attribute": 1}


def test_malformed_xml_reports_position():
    with pytest.raises(LogFormatError, match=r"line 3, column"):
        parse_xes(b"<log>\n<trace>\n<event></trace>\n</log>")


def test_bad_date_and_boolean():
    with pytest.raises(LogFormatError, match="unparseable date"):
        parse_xes(b'<log><trace><event><date key="t" value="yesterday"/></event></trace></log>')
    with pytest.raises(LogFormatError, match="unparseable boolean"):
        parse_xes(b'<log><trace><event><boolean key="b" value="maybe"/></event></trace></log>')


def test_empty_trace_skipped_and_duplicate_ids_renamed():
    doc = b"""<log>
      <trace><string key="concept:name" value="A"/></trace>
      <trace><string key="concept:name" value="B"/><event/></trace>
      <trace><string key="concept:name" value="B"/><event/></trace>
    </log>"""
    log = parse_xes(doc)
    assert [t.id for t in log] == ["B", "B#2"]
    assert log.parse_warnings["skipped empty trace"] == 1


def test_xes_file_and_stream(tmp_path):
    p = tmp_path / "x.xes"
    p.write_bytes(TWO_EVENTS)
    assert read_log(str(p)) == parse_xes(io.BytesIO(TWO_EVENTS))


def test_showcase_round_trip(showcase_log):
    again = parse_xes(write_xes(showcase_log))
    assert again == showcase_log
    for a, b in zip(again, showcase_log):
        for ea, eb in zip(a.events, b.events):
            assert {k: type(v) for k, v in ea.attributes.items()} == {k: type(v) for k, v in eb.attributes.items()}


# XML 1.0 cannot carry control characters or lone surrogates
xml_text = st.text(st.characters(blacklist_categories=("Cc", "Cs")), max_size=6)
values = st.one_of(
    xml_text,
    st.booleans(),
    st.integers(-10**9, 10**9),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    st.integers(0, 4 * 10**12).map(lambda ms: Timestamp(ms)),
)
events = st.dictionaries(st.sampled_from(["concept:name", "org:group", "n", "time:timestamp", "x y"]), values, max_size=4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(events, min_size=1, max_size=4), min_size=1, max_size=4))
def test_round_trip_property(traces):
    log = make_log((f"t{i}", evs) for i, evs in enumerate(traces))
    assert parse_xes(write_xes(log)) == log


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.data())
def test_prefix_exposes_first_k_events(n, data):
    trace = Trace("t", tuple(Event({"i": i}) for i in range(1, n + 1)))
    k = data.draw(st.integers(1, n))
    p = prefix(trace, k)
    assert len(p.events) == k and p.curr == k and p.last == n
    for i in range(1, k + 1):
        assert p.events[i - 1] is trace.event(i)


def test_prefix_bounds():
    t = Trace("t", tuple(Event({}) for _ in range(5)))
    p = prefix(t, 2)
    assert len(p) == 2 and p.last == 5
    full = prefix(t, 5)
    assert full.curr == full.last
    with pytest.raises(ValueError):
        TracePrefix(t, 0)
    with pytest.raises(ValueError):
        prefix(t, 6)
    with pytest.raises(IndexError):
        t.event(0)


def test_trace_and_log_invariants():
    with pytest.raises(ValueError):
        Trace("t", ())
    with pytest.raises(ValueError):
        EventLog((Trace("a", (Event({}),)), Trace("a", (Event({}),))))
    log = make_log([("a", [{}]), ("b", [{}, {}])])
    assert log.trace("b").id == "b" and log.n_events == 3
    with pytest.raises(KeyError):
        log.trace("zz")


# -- CSV ----------------------------------------------------------------------


def test_csv_grouping():
    text = b"case,act\nT1,a\nT1,b\nT2,c\n"
    log = parse_csv_log(text, CsvMapping("case"))
    assert [(t.id, len(t)) for t in log] == [("T1", 2), ("T2", 1)]
    assert log.traces[0].event(2).get("act") == "b"


def test_csv_bad_number_is_undefined():
    text = b"case,cost\nT1,abc\nT1,4\nT1,4.0\n"
    log = parse_csv_log(text, CsvMapping("case", {"cost": "number"}))
    t = log.traces[0]
    assert t.event(1).get("cost") is None
    assert t.event(2).get("cost") == 4 and isinstance(t.event(2).get("cost"), int)
    assert isinstance(t.event(3).get("cost"), float)
    assert log.parse_warnings == {"unparseable number in column 'cost'": 1}


def test_csv_sorted_by_timestamp():
    text = b"case,act,ts\nT1,late,2020-01-01T10:00:00Z\nT1,none,\nT1,early,2020-01-01T09:00:00Z\n"
    log = parse_csv_log(text, CsvMapping("case", timestamp_column="ts"))
    assert [e.get("act") for e in log.traces[0].events] == ["early", "late", "none"]


@pytest.mark.parametrize(
    "fmt, cell, ms",
    [("epoch_ms", "1500", 1500), ("epoch_s", "2", 2000), ("%d/%m/%Y %H:%M", "01/01/1970 00:01", 60_000)],
)
def test_csv_timestamp_formats(fmt, cell, ms):
    log = parse_csv_log(f"c,t\nA,{cell}\n".encode(), CsvMapping("c", timestamp_column="t", timestamp_format=fmt))
    assert log.traces[0].event(1).get("t") == ms


def test_csv_bool_and_delimiter():
    log = parse_csv_log(b"c;f\nA;yes\nA;0\n", CsvMapping("c", {"f": "bool"}, delimiter=";"))
    assert [e.get("f") for e in log.traces[0].events] == [True, False]


def test_csv_rows_without_id_rejected_and_counted():
    text = b"case,act\nT1,a\n,b\nT2,c\n ,d\n"
    log = parse_csv_log(text, CsvMapping("case"))
    assert log.n_events == 4 - 2
    assert log.parse_warnings["rejected row without trace id"] == 2


def test_csv_missing_column():
    with pytest.raises(LogFormatError, match="missing declared column"):
        parse_csv_log(b"a,b\n1,2\n", CsvMapping("case"))
    with pytest.raises(ValueError):
        CsvMapping("case", {"x": "decimal"})


def test_read_log_csv_needs_mapping(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("case,act\nT1,a\n")
    with pytest.raises(ValueError):
        read_log(str(p))
    assert len(read_log(str(p), csv_mapping=CsvMapping("case"))) == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["A", "B", "C", ""]), st.sampled_from(["x", "y"])), max_size=20))
def test_csv_event_count(rows):
    text = "case,act\n" + "".join(f"{c},{a}\n" for c, a in rows)
    log = parse_csv_log(text.encode(), CsvMapping("case"))
    rejected = sum(1 for c, _ in rows if not c)
    assert log.n_events == len(rows) - rejected
