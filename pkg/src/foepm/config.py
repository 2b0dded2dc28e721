"""Run configuration: one YAML (or JSON) document, overridable from the command line."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from .dataset import SplitSpec
from .encoding import EncoderSpec
from .events import CsvMapping
from .learners.model import ALGORITHMS, TrainParams

DEFAULT_ENCODERS = (
    EncoderSpec("oneHotLast", "concept:name"),
    EncoderSpec("oneHotCounts", "concept:name"),
    EncoderSpec("timeFeatures"),
)

_KEYS = {
    "log", "rule", "numeric_attributes", "encoders", "split", "k_range", "algorithms",
    "params", "output", "evaluation", "check_well_defined", "workers",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    log_path: Optional[str] = None
    log_format: Optional[str] = None
    csv_mapping: Optional[CsvMapping] = None
    rule: Optional[str] = None  # file path, or "bundled:<name>"
    numeric_attributes: tuple[str, ...] = ()
    encoders: tuple[EncoderSpec, ...] = DEFAULT_ENCODERS
    split: SplitSpec = field(default_factory=SplitSpec)
    k_min: int = 2
    k_max: int = -1
    algorithms: tuple[str, ...] = ("decisionTree",)
    params: TrainParams = field(default_factory=TrainParams)
    output_dir: str = "foepm-out"
    rounding: str = "half_up"
    unit: str = "ms"
    check_well_defined: bool = True
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) in (None, "")]
        if missing:
            flags = ", ".join("--" + n.replace("_path", "").replace("_", "-") for n in missing)
            raise ConfigError(f"missing setting(s): {flags} (or set them in the config file)")


def _resolve(base: Path, p: Optional[str]) -> Optional[str]:
    if p is None or str(p).startswith("bundled:"):
        return p
    q = Path(p)
    return str(q if q.is_absolute() else base / q)


def _parse_encoder(item: Any) -> EncoderSpec:
    if isinstance(item, str):
        kind, _, attribute = item.partition(":")
        return EncoderSpec(kind, attribute or None)
    if isinstance(item, dict):
        return EncoderSpec.from_dict(item)
    raise ConfigError(f"cannot read encoder entry {item!r}")


def parse_encoder_flag(text: str) -> EncoderSpec:
    """``KIND`` or ``KIND:ATTRIBUTE`` (the attribute may itself contain colons)."""
    try:
        return _parse_encoder(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_from_dict(doc: dict, base: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg = RunConfig()
    try:
        log = doc.get("log") or {}
        if isinstance(log, str):
            log = {"path": log}
        cfg.log_path = _resolve(base, log.get("path"))
        cfg.log_format = log.get("format")
        if log.get("csv"):
            cfg.csv_mapping = CsvMapping.from_dict(log["csv"])
        cfg.rule = _resolve(base, doc.get("rule"))
        cfg.numeric_attributes = tuple(doc.get("numeric_attributes", ()))
        if "encoders" in doc:
            cfg.encoders = tuple(_parse_encoder(e) for e in doc["encoders"])
        split = doc.get("split") or {}
        cfg.split = SplitSpec(
            float(split.get("train_fraction", 2 / 3)), split.get("order_key", "firstEventTimestamp")
        )
        k_range = doc.get("k_range") or {}
        cfg.k_min = int(k_range.get("min", 2))
        cfg.k_max = int(k_range.get("max", -1))
        algs = doc.get("algorithms", cfg.algorithms)
        cfg.algorithms = (algs,) if isinstance(algs, str) else tuple(algs)
        cfg.params = TrainParams.from_dict(doc.get("params") or {})
        out = doc.get("output") or {}
        if isinstance(out, str):
            out = {"dir": out}
        cfg.output_dir = _resolve(base, out.get("dir", cfg.output_dir))
        ev = doc.get("evaluation") or {}
        cfg.rounding = ev.get("rounding", cfg.rounding)
        cfg.unit = ev.get("unit", cfg.unit)
        cfg.check_well_defined = bool(doc.get("check_well_defined", True))
        if "workers" in doc:
            cfg.workers = int(doc["workers"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad config: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    bad = [a for a in cfg.algorithms if a not in ALGORITHMS]
    if bad:
        raise ConfigError(f"unknown algorithm(s) {', '.join(bad)}; expected {', '.join(ALGORITHMS)}")
    if cfg.rounding not in ("half_up", "floor", "ceil"):
        raise ConfigError(f"unknown rounding {cfg.rounding!r}")
    if cfg.unit not in ("ms", "days"):
        raise ConfigError(f"unknown unit {cfg.unit!r}")
    if cfg.log_format not in (None, "xes", "csv"):
        raise ConfigError(f"unknown log format {cfg.log_format!r}")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.k_min < 1:
        raise ConfigError("k-min must be at least 1")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc, path.parent)


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """Copy of ``cfg`` with every non-None change applied."""
    changes = {k: v for k, v in changes.items() if v is not None}
    out = replace(cfg, **changes)
    validate_config(out)
    return out
