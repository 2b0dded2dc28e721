"""Bundled rules against golden values produced by the hand-written oracles."""

import json

import pytest

from foepm import rules
from foepm.events import TracePrefix, is_numeric
from foepm.foe import apply_rule
from foepm.synthetic import showcase_log as generate_showcase

from oracles import ORACLES, golden_table


@pytest.fixture(scope="module")
def golden(data_dir):
    return json.loads((data_dir / "showcase_golden.json").read_text())


def normalise(v):
    return float(v) if is_numeric(v) else v


def test_golden_covers_every_bundled_rule(golden):
    assert sorted(golden) == sorted(rules.names()) == sorted(ORACLES)


@pytest.mark.parametrize("name", rules.names())
def test_rule_matches_golden(name, golden, showcase_log):
    rule = rules.load(name)
    got = {t.id: [normalise(apply_rule(rule, TracePrefix(t, k))) for k in range(1, len(t) + 1)] for t in showcase_log}
    assert got == golden[name]


@pytest.mark.parametrize("name", rules.names())
def test_golden_values_are_not_constant(name, golden):
    values = {json.dumps(v) for per_trace in golden[name].values() for v in per_trace}
    assert len(values) >= 2


def test_golden_file_is_fresh(golden, showcase_log):
    assert golden_table(showcase_log) == golden


def test_showcase_log_matches_generator(showcase_log):
    assert generate_showcase(20, 7) == showcase_log
    assert sorted({len(t) for t in showcase_log})[:2] == [1, 2]
