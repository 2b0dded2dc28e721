from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foepm.encoding import (
    EncoderSpec,
    PrefixEncoder,
    Vocabulary,
    encode_prefix,
    fit_vocabulary,
    schema_hash,
)
from foepm.events import TracePrefix, make_log

HOUR = 3_600_000
NAMES = [EncoderSpec("oneHotLast", "concept:name")]
COUNTS = [EncoderSpec("oneHotCounts", "concept:name")]


def named_log(*names, tid="t"):
    return make_log([(tid, [{"concept:name": n} for n in names])])


def test_first_occurrence_vocabulary():
    vocab = fit_vocabulary(named_log("a", "b", "a"), NAMES)
    sid = NAMES[0].id
    assert vocab.values[sid] == ("a", "b")
    assert vocab.index(sid, "a") == 1 and vocab.index(sid, "b") == 2
    assert vocab.index(sid, "zzz") == 0 and vocab.index(sid, None) == 0


def test_empty_attribute_has_no_columns():
    specs = [EncoderSpec("oneHotLast", "org:group")]
    log = named_log("a", "b")
    vocab = fit_vocabulary(log, specs)
    assert vocab.size(specs[0].id) == 0
    assert PrefixEncoder(specs, vocab).width == 0


def test_two_specs_same_attribute():
    specs = [EncoderSpec("oneHotLast", "concept:name"), EncoderSpec("oneHotCounts", "concept:name")]
    vocab = fit_vocabulary(named_log("b", "a", "b"), specs)
    assert vocab.values[specs[0].id] == vocab.values[specs[1].id] == ("b", "a")


def test_duplicate_spec_ids_rejected():
    with pytest.raises(ValueError):
        fit_vocabulary(named_log("a"), [NAMES[0], NAMES[0]])


def test_typed_vocabulary_keys():
    log = make_log([("t", [{"v": True}, {"v": 1}, {"v": 1.0}, {"v": "1"}])])
    spec = EncoderSpec("oneHotLast", "v")
    vocab = fit_vocabulary(log, [spec])
    assert vocab.values[spec.id] == (True, 1, "1")
    assert vocab.index(spec.id, 1.0) == 2 and vocab.index(spec.id, True) == 1


def test_one_hot_last():
    log = named_log("a", "b")
    vocab = fit_vocabulary(log, NAMES)
    fv = encode_prefix(TracePrefix(log.traces[0], 2), NAMES, vocab)
    assert fv.values.tolist() == [0.0, 1.0]
    assert fv.schema == ("oneHotLast:concept:name=a", "oneHotLast:concept:name=b")


def test_one_hot_counts():
    log = named_log("a", "a", "b")
    vocab = fit_vocabulary(log, COUNTS)
    assert encode_prefix(TracePrefix(log.traces[0], 3), COUNTS, vocab).values.tolist() == [2.0, 1.0]


def test_time_features_at_epoch():
    log = make_log([("t", [{"time:timestamp": 0.0}, {"time:timestamp": float(HOUR)}])])
    specs = [EncoderSpec("timeFeatures")]
    fv = encode_prefix(TracePrefix(log.traces[0], 2), specs, fit_vocabulary(log, specs))
    since_midnight, since_previous, since_week_start = fv.values
    assert since_previous == HOUR
    assert since_midnight == HOUR
    # the epoch is a Thursday, three days after Monday 00:00
    assert since_week_start == 3 * 24 * HOUR + HOUR
    first = encode_prefix(TracePrefix(log.traces[0], 1), specs, fit_vocabulary(log, specs))
    assert first.values[1] == 0.0


def test_time_features_on_a_monday():
    monday = 1_357_516_800_000  # 2013-01-07T00:00:00Z
    log = make_log([("t", [{"time:timestamp": float(monday + 90 * 60_000)}])])
    specs = [EncoderSpec("timeFeatures")]
    values = encode_prefix(TracePrefix(log.traces[0], 1), specs, Vocabulary()).values
    assert values.tolist() == [5_400_000.0, 0.0, 5_400_000.0]


def test_attribute_last():
    log = make_log([("t", [{"cost": 3.5, "grp": "G2"}, {"grp": "G1"}, {"grp": "G9"}])])
    specs = [EncoderSpec("attributeLast", "cost"), EncoderSpec("attributeLast", "grp")]
    vocab = fit_vocabulary(make_log([("u", [{"cost": 1.0, "grp": "G1"}, {"grp": "G2"}])]), specs)
    assert vocab.values[specs[0].id] == ()
    enc = PrefixEncoder(specs, vocab)
    t = log.traces[0]
    assert enc.encode(TracePrefix(t, 1)).tolist() == [3.5, 2.0]
    assert enc.encode(TracePrefix(t, 2)).tolist() == [0.0, 1.0]
    stats = Counter()
    assert enc.encode(TracePrefix(t, 3), stats).tolist() == [0.0, 0.0]
    assert stats["unseen categorical value"] == 1


def test_unseen_and_missing_values_encode_to_zero():
    vocab = fit_vocabulary(named_log("a", "b"), NAMES)
    log = make_log([("u", [{"concept:name": "c"}, {}])])
    enc = PrefixEncoder(NAMES, vocab)
    assert enc.encode(TracePrefix(log.traces[0], 1)).tolist() == [0.0, 0.0]
    assert enc.encode(TracePrefix(log.traces[0], 2)).tolist() == [0.0, 0.0]


def test_spec_validation_and_serialization():
    with pytest.raises(ValueError):
        EncoderSpec("bagOfWords", "x")
    with pytest.raises(ValueError):
        EncoderSpec("oneHotLast")
    spec = EncoderSpec("timeFeatures")
    assert spec.attribute == "time:timestamp" and spec.id == "timeFeatures:time:timestamp"
    assert EncoderSpec.from_dict(spec.to_dict()) == spec
    vocab = fit_vocabulary(named_log("a", "b"), NAMES)
    again = Vocabulary.from_dict(vocab.to_dict())
    assert again.values == vocab.values and again.digest() == vocab.digest()


def test_schema_hash_depends_on_order():
    assert schema_hash(["a", "b"]) != schema_hash(["b", "a"])
    assert len(schema_hash(["a"])) == 16


ALL_SPECS = [
    EncoderSpec("oneHotLast", "concept:name"),
    EncoderSpec("oneHotCounts", "concept:name"),
    EncoderSpec("attributeLast", "org:group"),
    EncoderSpec("timeFeatures"),
]


def test_width_is_constant_on_a_log(showcase_log):
    vocab = fit_vocabulary(showcase_log, ALL_SPECS)
    enc = PrefixEncoder(ALL_SPECS, vocab)
    n_names = vocab.size("oneHotLast:concept:name")
    assert enc.width == 2 * n_names + 1 + 3
    for t in showcase_log:
        for k in range(1, len(t) + 1):
            fv = enc.encode_vector(TracePrefix(t, k))
            assert len(fv.values) == len(fv.schema) == enc.width
            onehot = fv.values[:n_names]
            assert onehot.sum() == (1.0 if vocab.index("oneHotLast:concept:name", t.event(k).get("concept:name")) else 0.0)
            assert set(onehot.tolist()) <= {0.0, 1.0}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", None]), min_size=2, max_size=10))
def test_counts_are_incremental(names):
    log = make_log([("t", [{"concept:name": n} if n else {} for n in names])])
    vocab = fit_vocabulary(named_log("c", "a", "x"), COUNTS)
    enc = PrefixEncoder(COUNTS, vocab)
    t = log.traces[0]
    for k in range(2, len(t) + 1):
        step = np.zeros(enc.width)
        idx = vocab.index(COUNTS[0].id, t.event(k).get("concept:name"))
        if idx:
            step[idx - 1] = 1.0
        assert np.array_equal(enc.encode(TracePrefix(t, k)), enc.encode(TracePrefix(t, k - 1)) + step)
