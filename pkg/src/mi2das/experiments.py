"""Experiment campaigns: run the four evaluation stages end-to-end from a
declarative config and emit deterministic JSON/CSV reports.

Campaigns: ``layer1`` (normal-vs-attack sweeps), ``layer2_openset``
(known/unknown recall over class partitions), ``acm`` (attack classifier
bank over sampled partitions), ``incremental_one_step`` and
``incremental_multi_step`` (adaptive update schedules).

Reports are pure functions of (config, dataset, seed base): rerunning a
campaign yields byte-identical canonical JSON.  Wall-clock timings are kept
out of the canonical form.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classifiers import (
    ClassifierKind,
    GbtHyper,
    KnnHyper,
    LogRegHyper,
    RfHyper,
    SvmHyper,
    train_classifier,
)
from .data import (
    CsvSchema,
    Dataset,
    SplitSpec,
    SyntheticConfig,
    attack_subset,
    class_subset,
    generate_synthetic,
    load_edge_iiotset,
    make_split,
    preprocess,
    sample_balanced_testset,
)
from .detectors import (
    DetectorKind,
    GmmHyper,
    IforestHyper,
    LofHyper,
    OcsvmHyper,
)
from .incremental import (
    DatasetOracle,
    UnlabeledPool,
    UpdateConfig,
    run_multi_step,
    run_one_step,
)
from .labels import ClassLabel, code_of, label_of
from .metrics import MetricBlock, aggregate, binary_metrics, confusion, multiclass_metrics
from .pooling import (
    Layer1TrainConfig,
    PartitionSpec,
    enumerate_partitions,
    train_layer2,
)

CAMPAIGNS = (
    "layer1",
    "layer2_openset",
    "acm",
    "incremental_one_step",
    "incremental_multi_step",
)


@dataclasses.dataclass(frozen=True)
class DataSource:
    """Where campaign data comes from: synthetic clusters or official CSVs."""

    kind: str = "synthetic"
    synthetic: SyntheticConfig = SyntheticConfig(seed=7)
    train_fraction: float = 0.7
    split_seed: int = 0
    official_train_csv: Optional[str] = None
    official_test_csv: Optional[str] = None
    schema_json: Optional[str] = None
    expect_dim: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("synthetic", "official"):
            raise ValueError(f"unknown data source {self.kind!r}")


def load_source(src: DataSource) -> tuple[Dataset, Dataset]:
    """Produce standardized (train, test); the scaler is fitted on train."""
    if src.kind == "synthetic":
        ds = generate_synthetic(src.synthetic)
        train_raw, test_raw = make_split(
            ds, SplitSpec(train_fraction=src.train_fraction, seed=src.split_seed)
        )
        drop: tuple[str, ...] = ()
        categorical: tuple[str, ...] = ()
    else:
        if not (src.official_train_csv and src.official_test_csv and src.schema_json):
            raise FileNotFoundError(
                "official data source needs official_train_csv, official_test_csv "
                "and schema_json; download the dataset and point the config at it"
            )
        schema = CsvSchema.from_json(src.schema_json)
        train_raw, _ = load_edge_iiotset(src.official_train_csv, schema)
        test_raw, _ = load_edge_iiotset(src.official_test_csv, schema)
        drop = schema.drop
        categorical = schema.categorical
    train = preprocess(train_raw, drop=drop, categorical=categorical, expect_dim=src.expect_dim)
    test = preprocess(
        test_raw, drop=drop, categorical=categorical,
        fit_scaler_on=train_raw, expect_dim=src.expect_dim,
    )
    return train, test


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    campaign: str
    data: DataSource = DataSource()
    seed_base: int = 0
    out_dir: Optional[str] = None
    # layer1
    paradigms: tuple[str, ...] = ("novelty", "outlier")
    contamination_ratio: int = 100
    calibration_holdout: float = 0.0
    detector_grid: tuple[dict, ...] = ()
    th_per_grid: tuple[float, ...] = (1.0, 2.5, 5.0, 10.0)
    test_sizes: tuple[int, ...] = (1000, 5000)
    # layer2
    n_known_list: tuple[int, ...] = (1, 4, 7, 10, 13)
    partition_limit: Optional[int] = None
    layer2_detectors: tuple[dict, ...] = ()
    layer2_th_per: float = 5.0
    # acm: scenario list of (n_known, n_combinations)
    acm_scenarios: tuple[tuple[int, int], ...] = ((4, 50), (7, 50), (10, 50), (13, 14))
    classifiers: tuple[str, ...] = ("RANDOM_FOREST", "KNN", "GBT", "SVM", "LOGREG")
    classifier_hyper: tuple[dict, ...] = ()
    # incremental
    update: UpdateConfig = UpdateConfig()
    one_step_n: tuple[int, ...] = (4, 7, 10, 13)
    strategies: tuple[str, ...] = (
        "self_training",
        "label_spreading",
        "label_propagation",
        "active_learning",
    )
    replicates: int = 5
    multi_step_schedule: tuple[tuple[int, int], ...] = ((4, 10), (7, 7), (10, 4), (13, 1), (14, 0))
    training_logics: tuple[str, ...] = ("seed_based", "augmentation")

    def __post_init__(self):
        if self.campaign not in CAMPAIGNS:
            raise ValueError(f"unknown campaign {self.campaign!r}")


_DETECTOR_HYPERS = {
    DetectorKind.GMM: GmmHyper,
    DetectorKind.LOF: LofHyper,
    DetectorKind.OCSVM: OcsvmHyper,
    DetectorKind.IFOREST: IforestHyper,
}

_CLASSIFIER_HYPERS = {
    ClassifierKind.KNN: KnnHyper,
    ClassifierKind.LOGREG: LogRegHyper,
    ClassifierKind.SVM: SvmHyper,
    ClassifierKind.RANDOM_FOREST: RfHyper,
    ClassifierKind.GBT: GbtHyper,
}


def build_detector_entry(entry: dict, seed: int):
    """Turn {"kind": "GMM", "nc": 2, ...} into (kind, hyper)."""
    entry = dict(entry)
    kind = DetectorKind(entry.pop("kind"))
    cls = _DETECTOR_HYPERS[kind]
    if "seed" in [f.name for f in dataclasses.fields(cls)]:
        entry.setdefault("seed", seed)
    if "max_depth" in entry and entry["max_depth"] is not None:
        entry["max_depth"] = int(entry["max_depth"])
    return kind, cls(**entry)


def classifier_hyper_for(kind: ClassifierKind, overrides: Sequence[dict]):
    for entry in overrides:
        e = dict(entry)
        k = e.pop("kind", None)
        if k is not None and ClassifierKind(k) is kind:
            return _CLASSIFIER_HYPERS[kind](**e)
    return _CLASSIFIER_HYPERS[kind]()


def run_seed(seed_base: int, run_index: int) -> int:
    """Private RNG stream per run: hash of (seed base, run index)."""
    return int(np.random.SeedSequence([seed_base, run_index]).generate_state(1)[0])


@dataclasses.dataclass
class CampaignReport:
    campaign: str
    config_hash: str
    dataset_hash: str
    code_version: str
    runs: list[dict]
    aggregates: dict
    timings: dict = dataclasses.field(default_factory=dict)

    def to_canonical_dict(self) -> dict:
        body = {
            "campaign": self.campaign,
            "config_hash": self.config_hash,
            "dataset_hash": self.dataset_hash,
            "code_version": self.code_version,
            "runs": self.runs,
            "aggregates": self.aggregates,
        }
        return _strip_volatile(body)

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_canonical_dict(), sort_keys=True, indent=1)

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / f"{self.campaign}_report.json"
        report_path.write_text(self.to_canonical_json())
        (out / f"{self.campaign}_timings.json").write_text(
            json.dumps(self.timings, sort_keys=True, indent=1)
        )
        return report_path


_VOLATILE_KEYS = {"wall_clock"}


def _strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: _strip_volatile(v) for k, v in obj.items() if k not in _VOLATILE_KEYS}
    if isinstance(obj, (list, tuple)):
        return [_strip_volatile(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _config_hash(cfg: ExperimentConfig) -> str:
    def default(o):
        if dataclasses.is_dataclass(o):
            return dataclasses.asdict(o)
        if isinstance(o, (ClassLabel, DetectorKind, ClassifierKind)):
            return o.value
        raise TypeError(type(o))

    body = dataclasses.asdict(cfg)
    body.pop("out_dir", None)  # where the report lands is not part of its identity
    payload = json.dumps(body, sort_keys=True, default=default)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _dataset_hash(train: Dataset, test: Dataset) -> str:
    h = hashlib.sha256()
    for ds in (train, test):
        h.update(np.ascontiguousarray(ds.X).tobytes())
        h.update(np.ascontiguousarray(ds.y).tobytes())
    return h.hexdigest()[:16]


def _binary_eval(model, balanced: Dataset) -> MetricBlock:
    truth = ["Normal" if c == code_of(ClassLabel.NORMAL) else "Attack" for c in balanced.y]
    judged = model.predict_batch(balanced.X)
    preds = ["Normal" if j.value == "Inlier" else "Attack" for j in judged]
    return binary_metrics(confusion(truth, preds, ["Normal", "Attack"]), positive="Attack")


def run_layer1(cfg: ExperimentConfig) -> CampaignReport:
    from .pooling import train_layer1

    train, test = load_source(cfg.data)
    runs: list[dict] = []
    run_index = 0
    for paradigm in cfg.paradigms:
        for entry in cfg.detector_grid:
            for th_per in cfg.th_per_grid:
                seed = run_seed(cfg.seed_base, run_index)
                run_index += 1
                kind, hyper = build_detector_entry(entry, seed)
                l1cfg = Layer1TrainConfig(
                    detector=kind, hyper=hyper, th_per=th_per,
                    mode=paradigm, contamination_ratio=cfg.contamination_ratio,
                    calibration_holdout=cfg.calibration_holdout,
                    seed=seed,
                )
                model = train_layer1(train, l1cfg)
                for size in cfg.test_sizes:
                    balanced = sample_balanced_testset(test, size, seed=seed)
                    block = _binary_eval(model, balanced)
                    runs.append(
                        {
                            "paradigm": paradigm,
                            "detector": kind.value,
                            "hyper": {k: v for k, v in entry.items() if k != "kind"},
                            "th_per": th_per,
                            "test_size": size,
                            "metrics": block.to_dict(),
                        }
                    )

    top3: dict[str, list[dict]] = {}
    for paradigm in cfg.paradigms:
        for size in cfg.test_sizes:
            rows = [
                r for r in runs if r["paradigm"] == paradigm and r["test_size"] == size
            ]
            rows.sort(key=lambda r: -(r["metrics"]["accuracy"] or 0.0))
            top3[f"{paradigm}/{size}"] = rows[:3]
    return CampaignReport(
        campaign="layer1",
        config_hash=_config_hash(cfg),
        dataset_hash=_dataset_hash(train, test),
        code_version=__version__,
        runs=runs,
        aggregates={"top3_per_setting": top3, "n_runs": len(runs)},
    )


def _present_attacks(ds: Dataset) -> list[ClassLabel]:
    present = sorted(set(int(c) for c in np.unique(ds.y)) - {code_of(ClassLabel.NORMAL)})
    return [label_of(c) for c in present]


def _five_number(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    q = np.percentile(arr, [0, 25, 50, 75, 100])
    return {"min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}


def run_layer2(cfg: ExperimentConfig) -> CampaignReport:
    train, test = load_source(cfg.data)
    attacks_train = attack_subset(train)
    attacks_test = attack_subset(test)
    runs: list[dict] = []
    run_index = 0
    for n_known in cfg.n_known_list:
        total = math.comb(14, n_known)
        limit = cfg.partition_limit if cfg.partition_limit and cfg.partition_limit < total else None
        partitions = enumerate_partitions(n_known, limit=limit, seed=cfg.seed_base)
        for entry in cfg.layer2_detectors:
            for part in partitions:
                seed = run_seed(cfg.seed_base, run_index)
                run_index += 1
                kind, hyper = build_detector_entry(entry, seed)
                model = train_layer2(attacks_train, part, kind, hyper, cfg.layer2_th_per)
                known_codes = [code_of(c) for c in part.known]
                truth_known = np.isin(attacks_test.y, known_codes)
                inlier = model.score_batch(attacks_test.X) >= model.threshold
                known_recall = float(np.mean(inlier[truth_known])) if truth_known.any() else None
                unknown_recall = (
                    float(np.mean(~inlier[~truth_known])) if (~truth_known).any() else None
                )
                runs.append(
                    {
                        "n_known": n_known,
                        "detector": kind.value,
                        "partition": part.to_json(),
                        "known_recall": known_recall,
                        "unknown_recall": unknown_recall,
                    }
                )

    boxplots: dict[str, dict] = {}
    means: dict[str, dict] = {}
    for entry in cfg.layer2_detectors:
        det = entry["kind"]
        for n_known in cfg.n_known_list:
            rows = [r for r in runs if r["detector"] == det and r["n_known"] == n_known]
            for field in ("known_recall", "unknown_recall"):
                vals = [r[field] for r in rows if r[field] is not None]
                if vals:
                    boxplots[f"{det}/{n_known}/{field}"] = _five_number(vals)
        all_rows = [r for r in runs if r["detector"] == det]
        blocks = [
            MetricBlock(known_recall=r["known_recall"], unknown_recall=r["unknown_recall"])
            for r in all_rows
        ]
        if blocks:
            means[det] = aggregate(blocks)
    return CampaignReport(
        campaign="layer2_openset",
        config_hash=_config_hash(cfg),
        dataset_hash=_dataset_hash(train, test),
        code_version=__version__,
        runs=runs,
        aggregates={"boxplots": boxplots, "per_detector": means, "n_runs": len(runs)},
    )


def acm_grid(cfg: ExperimentConfig) -> list[dict]:
    """The planned (scenario, partition, classifier) run list, no training."""
    plan = []
    for n_known, n_combos in cfg.acm_scenarios:
        total = math.comb(14, n_known)
        limit = n_combos if n_combos < total else None
        partitions = enumerate_partitions(n_known, limit=limit, seed=cfg.seed_base)
        for part in partitions:
            for clf in cfg.classifiers:
                plan.append({"n_known": n_known, "classifier": clf, "partition": part})
    return plan


def run_acm(cfg: ExperimentConfig) -> CampaignReport:
    train, test = load_source(cfg.data)
    attacks_train = attack_subset(train)
    attacks_test = attack_subset(test)
    plan = acm_grid(cfg)
    runs: list[dict] = []
    for run_index, item in enumerate(plan):
        seed = run_seed(cfg.seed_base, run_index)
        part: PartitionSpec = item["partition"]
        kind = ClassifierKind(item["classifier"])
        known = part.known_sorted()
        tr = class_subset(attacks_train, known)
        te = class_subset(attacks_test, known)
        hyper = classifier_hyper_for(kind, cfg.classifier_hyper)
        model = train_classifier(kind, tr.X, tr.y, classes=known, hyper=hyper, seed=seed)
        truth = [label_of(int(c)) for c in te.y]
        preds = model.predict_batch(te.X)
        block = multiclass_metrics(confusion(truth, preds, known))
        runs.append(
            {
                "n_known": item["n_known"],
                "classifier": kind.value,
                "partition": part.to_json(),
                "metrics": block.to_dict(),
            }
        )

    table: dict[str, dict] = {}
    for clf in cfg.classifiers:
        blocks = []
        for r in runs:
            if r["classifier"] == clf:
                m = r["metrics"]
                blocks.append(
                    MetricBlock(
                        macro_f1=m["macro_f1"],
                        weighted_f1=m["weighted_f1"],
                        macro_accuracy=m["macro_accuracy"],
                        micro_accuracy=m["micro_accuracy"],
                    )
                )
        if blocks:
            table[clf] = aggregate(blocks)
    return CampaignReport(
        campaign="acm",
        config_hash=_config_hash(cfg),
        dataset_hash=_dataset_hash(train, test),
        code_version=__version__,
        runs=runs,
        aggregates={"per_classifier": table, "n_runs": len(runs)},
    )


def _incremental_world(train: Dataset, test: Dataset, known: list[ClassLabel]):
    attacks_train = attack_subset(train)
    attacks_test = attack_subset(test)
    known_train = class_subset(attacks_train, known)
    rest = [c for c in _present_attacks(attacks_train) if c not in set(known)]
    pool_ds = class_subset(attacks_train, rest)
    oracle = DatasetOracle.from_dataset(pool_ds)
    pool = UnlabeledPool.from_dataset(pool_ds)
    return known_train, rest, pool, oracle, attacks_test


def run_incremental_one_step(cfg: ExperimentConfig) -> CampaignReport:
    train, test = load_source(cfg.data)
    attacks = _present_attacks(attack_subset(train))
    runs: list[dict] = []
    run_index = 0
    for n_known in cfg.one_step_n:
        for strategy in cfg.strategies:
            for rep in range(cfg.replicates):
                seed = run_seed(cfg.seed_base, run_index)
                run_index += 1
                rng = np.random.default_rng(seed)
                known = sorted(
                    (attacks[i] for i in rng.choice(len(attacks), size=n_known, replace=False)),
                    key=code_of,
                )
                known_train, new, pool, oracle, attacks_test = _incremental_world(train, test, known)
                update = dataclasses.replace(cfg.update, strategy=strategy, seed=seed)
                reports = run_one_step(known, new, known_train, pool, oracle, attacks_test, update)
                final = reports[-1]
                runs.append(
                    {
                        "n_known": n_known,
                        "strategy": strategy,
                        "replicate": rep,
                        "known": [c.value for c in known],
                        "rounds": [r.to_dict() for r in reports],
                        "final_metrics": final.metrics.to_dict(),
                    }
                )

    table: dict[str, dict] = {}
    for n_known in cfg.one_step_n:
        for strategy in cfg.strategies:
            rows = [r for r in runs if r["n_known"] == n_known and r["strategy"] == strategy]
            blocks = [
                MetricBlock(
                    macro_f1=r["final_metrics"]["macro_f1"],
                    macro_accuracy=r["final_metrics"]["macro_accuracy"],
                    accuracy=r["final_metrics"]["accuracy"],
                )
                for r in rows
            ]
            if blocks:
                table[f"{n_known}/{strategy}"] = aggregate(blocks)
    return CampaignReport(
        campaign="incremental_one_step",
        config_hash=_config_hash(cfg),
        dataset_hash=_dataset_hash(train, test),
        code_version=__version__,
        runs=runs,
        aggregates={"per_setting": table, "n_runs": len(runs)},
    )


def run_incremental_multi_step(cfg: ExperimentConfig) -> CampaignReport:
    train, test = load_source(cfg.data)
    attacks = _present_attacks(attack_subset(train))
    schedule = [tuple(s) for s in cfg.multi_step_schedule]
    if schedule[-1][0] != len(attacks):
        raise ValueError(
            f"schedule ends at {schedule[-1][0]} known but the data has {len(attacks)} attack classes"
        )
    runs: list[dict] = []
    run_index = 0
    for logic in cfg.training_logics:
        for rep in range(cfg.replicates):
            seed = run_seed(cfg.seed_base, rep)  # same seed across logics
            run_index += 1
            rng = np.random.default_rng(seed)
            order = [attacks[i] for i in rng.permutation(len(attacks))]
            k0 = schedule[0][0]
            known = sorted(order[:k0], key=code_of)
            class_order = known + order[k0:]
            known_train, _, pool, oracle, attacks_test = _incremental_world(train, test, known)
            update = dataclasses.replace(cfg.update, training_logic=logic, seed=seed)
            steps = run_multi_step(
                schedule, class_order, known_train, pool, oracle, attacks_test, update
            )
            runs.append(
                {
                    "training_logic": logic,
                    "replicate": rep,
                    "class_order": [c.value for c in class_order],
                    "steps": [s.to_dict() for s in steps],
                }
            )

    table: dict[str, dict] = {}
    for logic in cfg.training_logics:
        rows = [r for r in runs if r["training_logic"] == logic]
        if not rows:
            continue
        n_steps = len(rows[0]["steps"])
        for si in range(n_steps):
            blocks = [
                MetricBlock(
                    macro_f1=r["steps"][si]["final_metrics"]["macro_f1"],
                    macro_accuracy=r["steps"][si]["final_metrics"]["macro_accuracy"],
                    accuracy=r["steps"][si]["final_metrics"]["accuracy"],
                )
                for r in rows
            ]
            label = rows[0]["steps"][si]["step_label"]
            table[f"{label}/{logic}"] = aggregate(blocks)
    return CampaignReport(
        campaign="incremental_multi_step",
        config_hash=_config_hash(cfg),
        dataset_hash=_dataset_hash(train, test),
        code_version=__version__,
        runs=runs,
        aggregates={"per_step": table, "n_runs": len(runs)},
    )


_RUNNERS = {
    "layer1": run_layer1,
    "layer2_openset": run_layer2,
    "acm": run_acm,
    "incremental_one_step": run_incremental_one_step,
    "incremental_multi_step": run_incremental_multi_step,
}


def run_campaign(cfg: ExperimentConfig) -> CampaignReport:
    report = _RUNNERS[cfg.campaign](cfg)
    if cfg.out_dir:
        report.write(cfg.out_dir)
    return report


def desk_profile(campaign: str, seed: int = 7) -> ExperimentConfig:
    """Reduced synthetic-data campaign configs that run in seconds/minutes."""
    data = DataSource(
        synthetic=SyntheticConfig(
            n_classes=15, dim=16, samples_per_class=200,
            class_separation=8.0, normal_modes=3, seed=seed,
        ),
        train_fraction=0.7,
        split_seed=seed,
    )
    common = dict(data=data, seed_base=seed)
    if campaign == "layer1":
        return ExperimentConfig(
            campaign="layer1",
            detector_grid=(
                {"kind": "GMM", "nc": 2},
                {"kind": "GMM", "nc": 3},
                {"kind": "IFOREST", "n_trees": 100, "subsample": 100},
            ),
            th_per_grid=(2.5, 5.0),
            test_sizes=(50,),
            contamination_ratio=50,
            calibration_holdout=0.25,
            **common,
        )
    if campaign == "layer2_openset":
        return ExperimentConfig(
            campaign="layer2_openset",
            n_known_list=(4, 7),
            partition_limit=5,
            layer2_detectors=({"kind": "GMM", "nc": 3}, {"kind": "LOF", "k": 10}),
            **common,
        )
    if campaign == "acm":
        return ExperimentConfig(
            campaign="acm",
            acm_scenarios=((4, 2), (7, 2), (10, 2), (13, 2)),
            classifiers=("RANDOM_FOREST", "KNN", "LOGREG"),
            classifier_hyper=({"kind": "RANDOM_FOREST", "n_trees": 60},),
            **common,
        )
    if campaign == "incremental_one_step":
        return ExperimentConfig(
            campaign="incremental_one_step",
            one_step_n=(13,),
            strategies=("self_training",),
            replicates=1,
            update=UpdateConfig(per_class_count=20, classifier_hyper=RfHyper(n_trees=40)),
            **common,
        )
    if campaign == "incremental_multi_step":
        return ExperimentConfig(
            campaign="incremental_multi_step",
            multi_step_schedule=((10, 4), (12, 2), (14, 0)),
            training_logics=("seed_based", "augmentation"),
            replicates=1,
            update=UpdateConfig(per_class_count=20, classifier_hyper=RfHyper(n_trees=40)),
            **common,
        )
    raise ValueError(f"unknown campaign {campaign!r}")


def full_profile(campaign: str, data: DataSource, seed: int = 0) -> ExperimentConfig:
    """Paper-scale grids; dataset-gated (hours on the official CSVs)."""
    common = dict(data=data, seed_base=seed)
    if campaign == "layer1":
        grid = tuple(
            [{"kind": "GMM", "nc": nc} for nc in (1, 2, 3, 4, 5, 6)]
            + [{"kind": "LOF", "k": k} for k in (10, 20, 35, 50)]
            + [{"kind": "OCSVM", "nu": nu} for nu in (0.01, 0.05, 0.1)]
        )
        return ExperimentConfig(
            campaign="layer1", detector_grid=grid,
            th_per_grid=(1.0, 2.5, 5.0, 10.0), test_sizes=(1000, 5000), **common,
        )
    if campaign == "layer2_openset":
        return ExperimentConfig(
            campaign="layer2_openset",
            n_known_list=(1, 4, 7, 10, 13),
            layer2_detectors=(
                {"kind": "GMM", "nc": 3},
                {"kind": "LOF", "k": 20},
                {"kind": "OCSVM", "nu": 0.05},
                {"kind": "IFOREST", "n_trees": 100, "subsample": 256},
            ),
            **common,
        )
    if campaign == "acm":
        return ExperimentConfig(campaign="acm", **common)
    if campaign == "incremental_one_step":
        return ExperimentConfig(campaign="incremental_one_step", **common)
    if campaign == "incremental_multi_step":
        return ExperimentConfig(campaign="incremental_multi_step", **common)
    raise ValueError(f"unknown campaign {campaign!r}")


def emit_csv(report: CampaignReport) -> str:
    """Flatten a report's aggregate table into CSV rows."""
    buf = io.StringIO()
    if report.campaign == "layer1":
        buf.write("setting,detector,hyper,th_per,accuracy,tpr,fpr,precision\n")
        for setting, rows in report.aggregates["top3_per_setting"].items():
            for r in rows:
                m = r["metrics"]
                hyper = ";".join(f"{k}={v}" for k, v in sorted(r["hyper"].items()))
                buf.write(
                    f"{setting},{r['detector']},{hyper},{r['th_per']},"
                    f"{m['accuracy']},{m['tpr']},{m['fpr']},{m['precision']}\n"
                )
    elif report.campaign == "layer2_openset":
        buf.write("detector,metric,mean,std,n\n")
        for det, agg in report.aggregates["per_detector"].items():
            for metric in ("known_recall", "unknown_recall"):
                if metric in agg:
                    a = agg[metric]
                    buf.write(f"{det},{metric},{a['mean']},{a['std']},{a['n']}\n")
    elif report.campaign == "acm":
        buf.write("model,macro_f1,weighted_f1,macro_accuracy,micro_accuracy\n")
        for clf, agg in report.aggregates["per_classifier"].items():
            cells = [
                f"{agg[m]['mean']:.4f} ± {agg[m]['std']:.4f}"
                for m in ("macro_f1", "weighted_f1", "macro_accuracy", "micro_accuracy")
            ]
            buf.write(f"{clf}," + ",".join(cells) + "\n")
    elif report.campaign in ("incremental_one_step", "incremental_multi_step"):
        key = "per_setting" if report.campaign == "incremental_one_step" else "per_step"
        buf.write("setting,macro_f1,balanced_acc,accuracy\n")
        for setting, agg in report.aggregates[key].items():
            cells = []
            for m in ("macro_f1", "macro_accuracy", "accuracy"):
                if m in agg:
                    cells.append(f"{agg[m]['mean']:.4f} ± {agg[m]['std']:.4f}")
                else:
                    cells.append("")
            buf.write(f"{setting}," + ",".join(cells) + "\n")
    return buf.getvalue()
