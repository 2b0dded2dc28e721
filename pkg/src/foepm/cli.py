"""Command-line interface.

Exit status: 0 on success, 1 when the data or rule fails a domain check
(rule not well defined, empty dataset, model mismatch), 2 on usage, parse
or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_encoder_flag, with_overrides
from .dataset import SplitSpec
from .encoding import PrefixEncoder
from .events import LogFormatError, TracePrefix, read_log, write_xes
from .foe import FOEError, to_text
from .foe import parser as foe_parser
from .foe.semantics import check_well_defined
from .learners.model import ALGORITHMS, ModelError, load_model, predict
from . import pipeline
from .synthetic import SCENARIOS, generate


class UsageError(Exception):
    pass


GRAMMAR = foe_parser.__doc__.split("Grammar", 1)[1].split("::", 1)[1].split("Numbers may", 1)[0]


def _common(p: argparse.ArgumentParser, rule=True, log_=True, out=False) -> None:
    p.add_argument("--config", "-c", help="run configuration (YAML or JSON)")
    if log_:
        p.add_argument("--log", help="event log (.xes, or .csv with a mapping in the config)")
        p.add_argument("--log-format", choices=("xes", "csv"))
    if rule:
        p.add_argument("--rule", help="rule file, or bundled:NAME for a bundled rule")
    p.add_argument("--k-min", type=int, help="smallest prefix length (default 2)")
    p.add_argument("--k-max", type=int, help="largest prefix length; <= 0 counts back from |trace| (default -1)")
    p.add_argument("--workers", type=int, help="worker threads (default: available CPUs)")
    if out:
        p.add_argument("--out", help="output directory")
        p.add_argument("--encoder", action="append", metavar="KIND[:ATTR]", help="encoder, repeatable; replaces the config's list")
        p.add_argument("--train-fraction", type=float)
        p.add_argument("--order-key", choices=("firstEventTimestamp", "logOrder"))
        p.add_argument("--no-check", action="store_true", help="skip the well-definedness check")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="foepm",
        description="Turn analytic rules over event logs into trained, evaluated prediction models.",
        epilog="Rule grammar:" + GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a rule's kind and well-definedness on a log",
                       epilog="Rule grammar:" + GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p)
    p.add_argument("--json", metavar="PATH", help="also write the report as JSON")

    p = sub.add_parser("build-dataset", help="write labelled train/test datasets")
    _common(p, out=True)

    p = sub.add_parser("train", help="train the configured models")
    _common(p, out=True)
    p.add_argument("--algorithm", action="append", choices=ALGORITHMS, help="repeatable; replaces the config's list")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("evaluate", help="score trained models on the test split")
    _common(p, out=True)
    p.add_argument("--algorithm", action="append", choices=ALGORITHMS)
    p.add_argument("--rounding", choices=("half_up", "floor", "ceil"))
    p.add_argument("--unit", choices=("ms", "days"))

    p = sub.add_parser("predict", help="predict the target for one trace prefix")
    p.add_argument("--model", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--log-format", choices=("xes", "csv"))
    p.add_argument("--config", "-c", help="config providing a CSV mapping")
    p.add_argument("--trace", required=True, help="trace id")
    p.add_argument("--k", type=int, required=True, help="prefix length")

    p = sub.add_parser("gen-synthetic", help="write a synthetic XES log")
    p.add_argument("--scenario", choices=tuple(SCENARIOS), default="pingpong")
    p.add_argument("--traces", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    return ap


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {
        "log_path": getattr(args, "log", None),
        "log_format": getattr(args, "log_format", None),
        "rule": getattr(args, "rule", None),
        "k_min": getattr(args, "k_min", None),
        "k_max": getattr(args, "k_max", None),
        "workers": getattr(args, "workers", None),
        "output_dir": getattr(args, "out", None),
        "rounding": getattr(args, "rounding", None),
        "unit": getattr(args, "unit", None),
    }
    if getattr(args, "encoder", None):
        changes["encoders"] = tuple(parse_encoder_flag(e) for e in args.encoder)
    if getattr(args, "algorithm", None):
        changes["algorithms"] = tuple(dict.fromkeys(args.algorithm))
    if getattr(args, "no_check", False):
        changes["check_well_defined"] = False
    if getattr(args, "seed", None) is not None:
        changes["params"] = replace(cfg.params, seed=args.seed)
    frac, order = getattr(args, "train_fraction", None), getattr(args, "order_key", None)
    if frac is not None or order is not None:
        try:
            changes["split"] = SplitSpec(
                frac if frac is not None else cfg.split.train_fraction,
                order or cfg.split.order_key,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return with_overrides(cfg, **changes)


def cmd_validate(args) -> int:
    cfg = _config(args)
    log_, rule = pipeline.load_inputs(cfg)
    kind = "regression" if rule.kind == "numeric" else "classification"
    print(f"rule: {len(rule.pairs)} condition(s), {rule.kind} targets ({kind})")
    print(to_text(rule))
    report = check_well_defined(rule, log_, cfg.k_min, cfg.k_max)
    if report.ok:
        print(f"well defined on all {report.prefixes_checked} prefixes of {len(log_)} traces")
    else:
        print(f"NOT well defined: {len(report.violations)} of {report.prefixes_checked} prefixes get conflicting targets")
        rows = [("trace", "k", "conditions", "targets")]
        rows += [(v.trace_id, str(v.k), ",".join(map(str, v.conditions)), " | ".join(map(repr, v.values)))
                 for v in report.violations]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        for r in rows:
            print("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    if args.json:
        doc = {"kind": rule.kind, **report.to_dict()}
        pipeline.write_json(args.json, doc)
    return 0 if report.ok else 1


def cmd_build_dataset(args) -> int:
    cfg = _config(args)
    prep = pipeline.prepare(cfg)
    train_ds, test_ds = pipeline.build_split_datasets(cfg, prep)
    paths = pipeline.write_datasets(cfg, prep, train_ds, test_ds)
    for name, ds, lg in (("train", train_ds, prep.train_log), ("test", test_ds, prep.test_log)):
        print(f"{name}: {len(lg)} traces, {len(ds)} rows, {ds.dropped} dropped (undefined target), {len(ds.schema)} features")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    prep = pipeline.prepare(cfg)
    train_ds, _ = pipeline.build_split_datasets(cfg, prep)
    models = pipeline.train_models(cfg, prep, train_ds)
    for p in pipeline.save_models(cfg, models):
        print(f"wrote {p}")
    print(f"trained on {len(train_ds)} rows from {len(prep.train_log)} traces ({train_ds.kind})")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    prep = pipeline.prepare(cfg)
    models = pipeline.load_models(cfg)
    report = pipeline.evaluate_models(cfg, prep, models)
    title = Path(cfg.rule.removeprefix("bundled:")).stem if cfg.rule else ""
    paths = pipeline.write_report(cfg, report, title)
    print(report.to_text(), end="")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    if model.vocabulary is None:
        raise ModelError("model carries no encoder vocabulary")
    mapping = load_config(args.config).csv_mapping if args.config else None
    log_ = read_log(args.log, args.log_format, mapping)
    try:
        trace = log_.trace(args.trace)
    except KeyError:
        raise UsageError(f"no trace {args.trace!r} in {args.log}") from None
    if not 1 <= args.k <= len(trace):
        raise UsageError(f"k={args.k} is outside 1..{len(trace)} for trace {args.trace!r}")
    fv = PrefixEncoder(model.encoders, model.vocabulary).encode_vector(TracePrefix(trace, args.k))
    pred = predict(model, fv)
    doc = {"trace": trace.id, "k": args.k, "prediction": pred.value}
    if pred.scores is not None:
        doc["scores"] = {str(k): v for k, v in pred.scores.items()}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_gen_synthetic(args) -> int:
    log_ = generate(args.scenario, args.traces, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(write_xes(log_))
    print(f"wrote {out}: {len(log_)} traces, {log_.n_events} events ({args.scenario})")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "build-dataset": cmd_build_dataset,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "gen-synthetic": cmd_gen_synthetic,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (FOEError, LogFormatError, ConfigError, UsageError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
