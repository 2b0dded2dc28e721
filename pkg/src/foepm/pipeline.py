"""End-to-end steps shared by the command line and the tests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import rules as bundled
from .config import RunConfig
from .dataset import CLASSIFICATION, Dataset, DatasetError, build_dataset, split_log, write_dataset
from .encoding import Vocabulary, fit_vocabulary
from .evaluation import MetricsReport, evaluate
from .events import EventLog, read_log
from .foe import AnalyticRule, load_rule
from .foe.semantics import WellDefinednessReport, check_well_defined
from .learners.model import MEAN_BASELINE, Model, load_model, save_model, train

DISPLAY_NAMES = {
    "decisionTree": "Decision Tree",
    "randomForest": "Random Forest",
    "linearRegression": "Linear Regression",
}


def baseline_name(kind: str) -> str:
    return "Majority class" if kind == CLASSIFICATION else "Mean-based prediction"


def load_rule_setting(spec: str, numeric_attributes=()) -> AnalyticRule:
    if spec.startswith("bundled:"):
        return load_rule(bundled.path(spec[len("bundled:"):]), numeric_attributes)
    return load_rule(spec, numeric_attributes)


def load_inputs(cfg: RunConfig) -> tuple[EventLog, AnalyticRule]:
    cfg.require("log_path", "rule")
    rule = load_rule_setting(cfg.rule, cfg.numeric_attributes)
    log = read_log(str(cfg.log_path), cfg.log_format, cfg.csv_mapping)
    return log, rule


@dataclass
class Prepared:
    rule: AnalyticRule
    train_log: EventLog
    test_log: EventLog
    vocab: Vocabulary
    report: Optional[WellDefinednessReport]


def prepare(cfg: RunConfig) -> Prepared:
    """Read inputs, check the rule on the whole log, split and fit the vocabulary."""
    log, rule = load_inputs(cfg)
    report = None
    if cfg.check_well_defined:
        report = check_well_defined(rule, log, cfg.k_min, cfg.k_max)
        if not report.ok:
            v = report.violations[0]
            raise DatasetError(
                f"rule is not well defined: {len(report.violations)} prefix(es) get conflicting targets, "
                f"first at trace {v.trace_id!r} k={v.k} (conditions {list(v.conditions)})",
                report,
            )
    train_log, test_log = split_log(log, cfg.split)
    vocab = fit_vocabulary(train_log, cfg.encoders)
    return Prepared(rule, train_log, test_log, vocab, report)


def build_split_datasets(cfg: RunConfig, prep: Prepared) -> tuple[Dataset, Dataset]:
    kw = dict(k_min=cfg.k_min, k_max=cfg.k_max, check=False, workers=cfg.workers)
    train_ds = build_dataset(prep.rule, prep.train_log, cfg.encoders, prep.vocab, **kw)
    test_ds = build_dataset(prep.rule, prep.test_log, cfg.encoders, prep.vocab, class_labels=train_ds.class_labels, **kw)
    return train_ds, test_ds


def write_datasets(cfg: RunConfig, prep: Prepared, train_ds: Dataset, test_ds: Dataset) -> list[Path]:
    out = Path(cfg.output_dir)
    paths = []
    for name, ds in (("train", train_ds), ("test", test_ds)):
        paths.extend(write_dataset(out / f"{name}.csv", ds, cfg.encoders, prep.vocab, prep.rule))
    return paths


def model_path(cfg: RunConfig, algorithm: str) -> Path:
    return Path(cfg.output_dir) / "models" / f"{algorithm}.json"


def train_models(cfg: RunConfig, prep: Prepared, train_ds: Dataset) -> dict[str, Model]:
    """Train every configured algorithm plus the constant baseline."""
    models = {}
    for alg in dict.fromkeys((*cfg.algorithms, MEAN_BASELINE)):
        m = train(train_ds, alg, cfg.params, workers=cfg.workers)
        m.encoders = tuple(cfg.encoders)
        m.vocabulary = prep.vocab
        m.meta = {"trainTraces": len(prep.train_log), "trainRows": len(train_ds), "kRange": [cfg.k_min, cfg.k_max]}
        models[alg] = m
    return models


def save_models(cfg: RunConfig, models: dict[str, Model]) -> list[Path]:
    paths = []
    for alg, m in models.items():
        p = model_path(cfg, alg)
        save_model(m, p)
        paths.append(p)
    return paths


def load_models(cfg: RunConfig) -> dict[str, Model]:
    models = {}
    for alg in dict.fromkeys((*cfg.algorithms, MEAN_BASELINE)):
        p = model_path(cfg, alg)
        if not p.is_file():
            raise FileNotFoundError(f"no trained model at {p}; run 'foepm train' first")
        models[alg] = load_model(p)
    return models


def evaluate_models(cfg: RunConfig, prep: Prepared, models: dict[str, Model]) -> MetricsReport:
    kind = next(iter(models.values())).kind
    named = [
        (baseline_name(kind) if alg == MEAN_BASELINE else DISPLAY_NAMES.get(alg, alg), m)
        for alg, m in models.items()
    ]
    return evaluate(
        named, prep.rule, prep.test_log, cfg.encoders, prep.vocab,
        rounding=cfg.rounding, unit=cfg.unit, k_min=cfg.k_min, k_max=cfg.k_max,
    )


def write_report(cfg: RunConfig, report: MetricsReport, title: str = "") -> list[Path]:
    from .plotting import plot_report

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.txt", out / "report.json", out / "report.csv"]
    paths[0].write_text(report.to_text(), encoding="utf-8")
    paths[1].write_text(report.to_json(), encoding="utf-8")
    paths[2].write_text(report.to_csv(), encoding="utf-8")
    paths.append(plot_report(report, out / "report.png", title))
    return paths


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
