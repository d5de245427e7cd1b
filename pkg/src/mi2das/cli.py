"""Operator command line: ingest and preprocess CSVs, train and apply
models, run experiment campaigns, serve the live pipeline, and re-emit
reports as CSV tables.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

USAGE_ERROR, DATA_ERROR, RUNTIME_ERROR = 1, 2, 3


def _print(payload, as_json: bool):
    if as_json:
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _parse_hyper(raw: str | None) -> dict:
    return json.loads(raw) if raw else {}


def cmd_ingest(args) -> int:
    from .data import CsvSchema, load_edge_iiotset

    schema = CsvSchema.from_json(args.schema)
    ds, report = load_edge_iiotset(args.csv, schema)
    payload = {
        "n_loaded": report.n_loaded,
        "n_rejected": len(report.rejections),
        "class_counts": {k.value: v for k, v in sorted(ds.class_counts().items(), key=lambda kv: kv[0].value)},
    }
    _print(payload, args.json)
    return 0


def cmd_preprocess(args) -> int:
    from .data import CsvSchema, dump_jsonl, load_edge_iiotset, preprocess

    schema = CsvSchema.from_json(args.schema)
    raw, _ = load_edge_iiotset(args.csv, schema)
    fit_on = None
    if args.fit_csv:
        fit_on, _ = load_edge_iiotset(args.fit_csv, schema)
    ds = preprocess(
        raw,
        drop=schema.drop,
        categorical=schema.categorical,
        fit_scaler_on=fit_on,
        expect_dim=args.expect_dim,
    )
    dump_jsonl(ds, args.out)
    _print({"written": args.out, "records": len(ds), "dim": ds.dim}, args.json)
    return 0


def cmd_train_detector(args) -> int:
    from .data import load_jsonl
    from .experiments import build_detector_entry
    from .pooling import Layer1TrainConfig, PartitionSpec, train_layer1, train_layer2
    from .labels import ClassLabel
    from .serialize import save_model

    ds = load_jsonl(args.data)
    entry = {"kind": args.kind, **_parse_hyper(args.hyper)}
    kind, hyper = build_detector_entry(entry, args.seed)
    if args.layer == 1:
        cfg = Layer1TrainConfig(
            detector=kind, hyper=hyper, th_per=args.th_per,
            mode=args.mode, contamination_ratio=args.ratio, seed=args.seed,
        )
        model = train_layer1(ds, cfg)
    else:
        if not args.known:
            raise ValueError("--known CLASS[,CLASS...] is required for layer 2")
        known = [ClassLabel(c) for c in args.known.split(",")]
        part = PartitionSpec.from_known(known)
        model = train_layer2(ds, part, kind, hyper, args.th_per)
    save_model(model, args.out)
    _print({"written": args.out, "kind": kind.value, "threshold": model.threshold}, args.json)
    return 0


def cmd_train_classifier(args) -> int:
    from .classifiers import ClassifierKind, train_classifier
    from .data import attack_subset, load_jsonl
    from .experiments import classifier_hyper_for
    from .serialize import save_model

    ds = attack_subset(load_jsonl(args.data))
    kind = ClassifierKind(args.kind)
    overrides = [{"kind": args.kind, **_parse_hyper(args.hyper)}] if args.hyper else []
    hyper = classifier_hyper_for(kind, overrides)
    model = train_classifier(kind, ds.X, ds.y, hyper=hyper, seed=args.seed)
    save_model(model, args.out)
    _print(
        {"written": args.out, "kind": kind.value, "classes": [c.value for c in model.classes]},
        args.json,
    )
    return 0


def cmd_route(args) -> int:
    from .data import load_jsonl
    from .pooling import route_batch
    from .serialize import load_model

    l1 = load_model(args.l1)
    l2 = load_model(args.l2)
    ds = load_jsonl(args.data)
    assignments = route_batch(ds.X, l1, l2)
    counts = {"NormalPool": 0, "KnownAttackPool": 0, "UnknownPool": 0}
    with open(args.out, "w") as fh:
        for rid, a in zip(ds.ids, assignments):
            counts[a.pool.value] += 1
            fh.write(json.dumps({"id": str(rid), **a.to_json()}) + "\n")
    _print({"written": args.out, **counts}, args.json)
    return 0


def _experiment_config(args):
    from .experiments import DataSource, desk_profile, full_profile

    if args.profile == "desk":
        cfg = desk_profile(args.campaign, seed=args.seed)
    else:
        data_dir = args.dataset_dir or os.environ.get("MI2DAS_DATA_DIR")
        if not data_dir:
            raise FileNotFoundError(
                "full profile needs --dataset-dir or MI2DAS_DATA_DIR pointing at the official CSVs"
            )
        root = Path(data_dir)
        data = DataSource(
            kind="official",
            official_train_csv=str(root / "train.csv"),
            official_test_csv=str(root / "test.csv"),
            schema_json=str(root / "schema.json"),
            expect_dim=53,
        )
        cfg = full_profile(args.campaign, data, seed=args.seed)
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        cfg = _apply_overrides(cfg, overrides)
    if args.out:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    return cfg


def _apply_overrides(cfg, overrides: dict):
    def replace_nested(obj, patch: dict):
        kwargs = {}
        for key, value in patch.items():
            current = getattr(obj, key)
            if dataclasses.is_dataclass(current) and isinstance(value, dict):
                kwargs[key] = replace_nested(current, value)
            elif isinstance(value, list):
                kwargs[key] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            else:
                kwargs[key] = value
        return dataclasses.replace(obj, **kwargs)

    return replace_nested(cfg, overrides)


def cmd_experiment(args) -> int:
    from .experiments import run_campaign

    cfg = _experiment_config(args)
    report = run_campaign(cfg)
    summary = {
        "campaign": report.campaign,
        "n_runs": report.aggregates.get("n_runs"),
        "config_hash": report.config_hash,
        "dataset_hash": report.dataset_hash,
    }
    if args.out:
        summary["report"] = str(Path(args.out) / f"{report.campaign}_report.json")
    if args.json:
        payload = report.to_canonical_dict() if args.full_output else summary
        print(json.dumps(payload, sort_keys=True))
    else:
        _print(summary, False)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    cfg = ServiceConfig(data_dir=args.data_dir, seed=args.seed)
    serve(cfg, host=args.host, port=args.port)
    return 0


def cmd_report(args) -> int:
    from .experiments import CampaignReport, emit_csv

    raw = json.loads(Path(getattr(args, "in")).read_text())
    report = CampaignReport(
        campaign=raw["campaign"],
        config_hash=raw["config_hash"],
        dataset_hash=raw["dataset_hash"],
        code_version=raw["code_version"],
        runs=raw["runs"],
        aggregates=raw["aggregates"],
    )
    if args.format == "csv":
        text = emit_csv(report)
    else:
        text = json.dumps(report.to_canonical_dict(), sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text)
        _print({"written": args.out}, args.json)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mi2das", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("ingest", help="load and validate a raw traffic CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    common(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("preprocess", help="drop/encode/standardize into a dataset dump")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fit-csv", help="fit the scaler on this CSV instead (train split)")
    p.add_argument("--expect-dim", type=int)
    common(p)
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("train-detector", help="fit + calibrate a pooling-layer detector")
    p.add_argument("--data", required=True, help="preprocessed jsonl dump")
    p.add_argument("--kind", required=True, choices=["GMM", "LOF", "OCSVM", "IFOREST"])
    p.add_argument("--hyper", help="hyperparameters as JSON")
    p.add_argument("--layer", type=int, default=1, choices=[1, 2])
    p.add_argument("--mode", default="novelty", choices=["novelty", "outlier"])
    p.add_argument("--ratio", type=int, default=100)
    p.add_argument("--th-per", type=float, default=5.0)
    p.add_argument("--known", help="comma-separated known classes (layer 2)")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_train_detector)

    p = sub.add_parser("train-classifier", help="fit an attack classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", required=True,
                   choices=["KNN", "LOGREG", "SVM", "RANDOM_FOREST", "GBT"])
    p.add_argument("--hyper", help="hyperparameters as JSON")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_train_classifier)

    p = sub.add_parser("route", help="pool flows through both layers")
    p.add_argument("--l1", required=True)
    p.add_argument("--l2", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_route)

    p = sub.add_parser("experiment", help="run an evaluation campaign")
    p.add_argument("--campaign", required=True,
                   choices=["layer1", "layer2_openset", "acm",
                            "incremental_one_step", "incremental_multi_step"])
    p.add_argument("--profile", default="desk", choices=["desk", "full"])
    p.add_argument("--config", help="JSON file with config overrides")
    p.add_argument("--out", help="report output directory")
    p.add_argument("--dataset-dir", help="official CSV directory (full profile)")
    p.add_argument("--full-output", action="store_true",
                   help="with --json, print the whole canonical report")
    common(p)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("serve", help="run the live pipeline service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8137)
    p.add_argument("--data-dir", help="persistence directory")
    common(p)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("report", help="re-emit a campaign report")
    p.add_argument("--in", required=True, dest="in")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--out")
    common(p)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE_ERROR
    try:
        return args.fn(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except KeyboardInterrupt:
        return RUNTIME_ERROR
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
