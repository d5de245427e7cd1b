"""Traffic dataset handling: CSV ingestion, preprocessing (column drops,
one-hot encoding, z-score standardization), train/test splits, balanced test
subsets, and synthetic desk-scale data generation.

All sampling is seeded and operates over record ids sorted lexicographically,
never over file order, so results are stable across storage backends.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
import pandas as pd

from .labels import (
    CLASS_ORDER,
    UNLABELED,
    ClassLabel,
    code_of,
    label_of,
    parse_label,
)


@dataclasses.dataclass(frozen=True)
class FlowRecord:
    """One preprocessed traffic sample."""

    id: str
    features: np.ndarray
    label: Optional[ClassLabel] = None


@dataclasses.dataclass(frozen=True)
class Scaler:
    """Per-feature (mean, stddev) pairs fitted on a training partition.

    Population stddev; constant columns carry std 0 and standardize to zero.
    """

    mean: np.ndarray
    std: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        std = np.where(self.std == 0.0, 1.0, self.std)
        out = (X - self.mean) / std
        out[:, self.std == 0.0] = 0.0
        return out


@dataclasses.dataclass
class Dataset:
    """Columnar collection of flow records sharing one dimensionality.

    ``y`` holds integer class codes into ``CLASS_ORDER`` (-1 = unlabeled).
    """

    X: np.ndarray
    y: np.ndarray
    ids: np.ndarray
    feature_names: list[str]
    scaler: Optional[Scaler] = None

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if len(self.y) != len(self.X) or len(self.ids) != len(self.X):
            raise ValueError("X, y and ids must have equal length")
        if len(set(self.ids.tolist())) != len(self.ids):
            raise ValueError("record ids must be unique")

    def __len__(self) -> int:
        return len(self.X)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def labels(self) -> list[Optional[ClassLabel]]:
        return [label_of(c) if c != UNLABELED else None for c in self.y]

    def records(self) -> Iterator[FlowRecord]:
        for i in range(len(self)):
            lab = label_of(self.y[i]) if self.y[i] != UNLABELED else None
            yield FlowRecord(id=str(self.ids[i]), features=self.X[i], label=lab)

    def subset(self, mask_or_index) -> "Dataset":
        idx = np.asarray(mask_or_index)
        return Dataset(
            X=self.X[idx],
            y=self.y[idx],
            ids=self.ids[idx],
            feature_names=list(self.feature_names),
            scaler=self.scaler,
        )

    def class_counts(self) -> dict[ClassLabel, int]:
        out: dict[ClassLabel, int] = {}
        for code in np.unique(self.y):
            if code == UNLABELED:
                continue
            out[label_of(int(code))] = int(np.sum(self.y == code))
        return out


@dataclasses.dataclass(frozen=True)
class SplitSpec:
    """How to partition a dataset into train/test.

    ``official`` mode loads the pre-partitioned train/test CSV pair;
    ``random_stratified`` shuffles per class under the seed.
    """

    mode: str = "random_stratified"
    train_fraction: float = 0.8
    seed: int = 0
    official_train_csv: Optional[str] = None
    official_test_csv: Optional[str] = None

    def __post_init__(self):
        if self.mode not in ("official", "random_stratified"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.mode == "random_stratified" and not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0,1)")


@dataclasses.dataclass(frozen=True)
class SyntheticConfig:
    """Gaussian class-conditional clusters standing in for real traffic.

    ``class_separation`` is the minimum distance between class means in units
    of the within-class stddev (1.0).  The normal class is itself a mixture of
    ``normal_modes`` components to exercise multi-modal density models.
    """

    n_classes: int = 15
    dim: int = 16
    samples_per_class: int = 200
    class_separation: float = 8.0
    normal_modes: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2 or self.n_classes > len(CLASS_ORDER):
            raise ValueError("n_classes must be in [2, 15]")
        if self.dim < 1 or self.samples_per_class < 1 or self.normal_modes < 1:
            raise ValueError("dim, samples_per_class and normal_modes must be positive")
        if self.class_separation <= 0:
            raise ValueError("class_separation must be positive")


@dataclasses.dataclass(frozen=True)
class CsvSchema:
    """Side-file schema for raw CSV ingestion."""

    label_column: str
    drop: tuple[str, ...] = ()
    categorical: tuple[str, ...] = ()

    @staticmethod
    def from_json(path: str | Path) -> "CsvSchema":
        raw = json.loads(Path(path).read_text())
        return CsvSchema(
            label_column=raw["label_column"],
            drop=tuple(raw.get("drop", ())),
            categorical=tuple(raw.get("categorical", ())),
        )


@dataclasses.dataclass
class RowRejection:
    row: int
    reason: str


@dataclasses.dataclass
class LoadReport:
    n_loaded: int
    rejections: list[RowRejection]


def load_edge_iiotset(path: str | Path, schema: CsvSchema) -> tuple[Dataset, LoadReport]:
    """Load a raw traffic CSV into an unpreprocessed Dataset.

    Rows with unparseable labels or missing cells are rejected with a
    row-level report, never silently dropped.  Raises if the file or the
    label column is missing, or if zero records survive.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    df = pd.read_csv(path, low_memory=False)
    if schema.label_column not in df.columns:
        raise ValueError(f"label column {schema.label_column!r} absent from {path.name}")

    rejections: list[RowRejection] = []
    codes = np.full(len(df), UNLABELED, dtype=np.int64)
    keep = np.ones(len(df), dtype=bool)
    for i, raw in enumerate(df[schema.label_column].tolist()):
        try:
            codes[i] = code_of(parse_label(raw))
        except ValueError as exc:
            keep[i] = False
            rejections.append(RowRejection(row=i, reason=str(exc)))

    feature_cols = [c for c in df.columns if c != schema.label_column]
    missing = df[feature_cols].isna().any(axis=1).to_numpy()
    for i in np.flatnonzero(missing & keep):
        keep[i] = False
        rejections.append(RowRejection(row=int(i), reason="missing value"))

    if not keep.any():
        raise ValueError(f"zero records after filtering {path.name}")

    kept = df.loc[keep, feature_cols]
    width = int(np.ceil(np.log10(max(len(df), 10))))
    ids = np.array([f"{path.stem}-{i:0{width}d}" for i in np.flatnonzero(keep)])

    # Raw columns stay as objects until preprocess() encodes them; numeric
    # conversion happens column-wise there so categoricals survive intact.
    X = kept.to_numpy()
    ds = Dataset(
        X=X,
        y=codes[keep],
        ids=ids,
        feature_names=list(feature_cols),
    )
    return ds, LoadReport(n_loaded=len(ds), rejections=rejections)


def preprocess(
    ds: Dataset,
    drop: Sequence[str] = (),
    categorical: Sequence[str] = (),
    fit_scaler_on: Optional[Dataset] = None,
    expect_dim: Optional[int] = None,
) -> Dataset:
    """Drop columns, one-hot encode categoricals, z-score standardize.

    Standardization statistics come from ``fit_scaler_on`` (defaults to the
    dataset itself, i.e. a training partition); apply the returned dataset's
    scaler to test partitions via ``apply_preprocessing``.
    """
    for name in list(drop) + list(categorical):
        if name not in ds.feature_names:
            raise ValueError(f"unknown column {name!r}")

    kept = [c for c in ds.feature_names if c not in set(drop)]
    cat = [c for c in kept if c in set(categorical)]
    num = [c for c in kept if c not in set(categorical)]

    col_index = {c: i for i, c in enumerate(ds.feature_names)}

    def numeric_block(source: Dataset) -> np.ndarray:
        cols = []
        for c in num:
            col = source.X[:, col_index[c]]
            try:
                cols.append(np.asarray(col, dtype=np.float64))
            except (TypeError, ValueError):
                raise ValueError(f"non-numeric column {c!r} not declared categorical")
        return np.column_stack(cols) if cols else np.empty((len(source), 0))

    # Category vocabularies come from the fitting partition so train and test
    # encode identically; unseen test categories map to all-zeros.
    fit_ds = fit_scaler_on if fit_scaler_on is not None else ds
    vocab: dict[str, list] = {}
    for c in cat:
        values = fit_ds.X[:, col_index[c]]
        vocab[c] = sorted({str(v) for v in values})

    def onehot_block(source: Dataset) -> tuple[np.ndarray, list[str]]:
        blocks, names = [], []
        for c in cat:
            values = np.array([str(v) for v in source.X[:, col_index[c]]])
            for v in vocab[c]:
                blocks.append((values == v).astype(np.float64))
                names.append(f"{c}={v}")
        if not blocks:
            return np.empty((len(source), 0)), []
        return np.column_stack(blocks), names

    X_num = numeric_block(ds)
    X_cat, cat_names = onehot_block(ds)
    X = np.hstack([X_num, X_cat])
    names = num + cat_names

    if expect_dim is not None and X.shape[1] != expect_dim:
        raise ValueError(
            f"expected {expect_dim} features after preprocessing, got {X.shape[1]}"
        )

    if fit_scaler_on is None:
        mean = X.mean(axis=0)
        std = X.std(axis=0)  # population stddev
        scaler = Scaler(mean=mean, std=std)
    else:
        fit_num = numeric_block(fit_ds)
        fit_cat, _ = onehot_block(fit_ds)
        fit_X = np.hstack([fit_num, fit_cat])
        scaler = Scaler(mean=fit_X.mean(axis=0), std=fit_X.std(axis=0))

    Xs = scaler.transform(X)
    if not np.isfinite(Xs).all():
        raise ValueError("non-finite values after preprocessing")
    return Dataset(X=Xs, y=ds.y.copy(), ids=ds.ids.copy(), feature_names=names, scaler=scaler)


def _sorted_order(ds: Dataset) -> np.ndarray:
    return np.argsort(ds.ids, kind="stable")


def make_split(
    ds: Optional[Dataset],
    spec: SplitSpec,
    schema: Optional[CsvSchema] = None,
) -> tuple[Dataset, Dataset]:
    """Partition into (train, test).

    Official mode loads the pre-partitioned CSV pair named by ``spec``
    (counts then match the published per-class distribution by construction).
    Random mode stratifies per class, deterministic under the seed.
    """
    if spec.mode == "official":
        if not spec.official_train_csv or not spec.official_test_csv:
            raise ValueError("official mode requires official_train_csv and official_test_csv")
        if schema is None:
            raise ValueError("official mode requires a CSV schema")
        train, _ = load_edge_iiotset(spec.official_train_csv, schema)
        test, _ = load_edge_iiotset(spec.official_test_csv, schema)
        return train, test

    if ds is None:
        raise ValueError("random_stratified mode requires a dataset")
    rng = np.random.default_rng(spec.seed)
    order = _sorted_order(ds)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for code in sorted(int(c) for c in np.unique(ds.y)):
        cls_idx = order[ds.y[order] == code]
        perm = rng.permutation(len(cls_idx))
        n_train = int(round(spec.train_fraction * len(cls_idx)))
        n_train = min(max(n_train, 1), len(cls_idx) - 1) if len(cls_idx) > 1 else n_train
        shuffled = cls_idx[perm]
        train_idx.extend(shuffled[:n_train].tolist())
        test_idx.extend(shuffled[n_train:].tolist())
    return ds.subset(np.array(sorted(train_idx))), ds.subset(np.array(sorted(test_idx)))


def sample_balanced_testset(ds: Dataset, n_per_side: int, seed: int = 0) -> Dataset:
    """Draw exactly ``n_per_side`` normal and ``n_per_side`` attack records.

    Attack records are drawn uniformly from the pooled attack classes,
    without replacement.
    """
    if n_per_side < 1:
        raise ValueError("n_per_side must be positive")
    order = _sorted_order(ds)
    normal_code = code_of(ClassLabel.NORMAL)
    normal_idx = order[ds.y[order] == normal_code]
    attack_idx = order[(ds.y[order] != normal_code) & (ds.y[order] != UNLABELED)]
    if len(normal_idx) < n_per_side:
        raise ValueError(f"need {n_per_side} normal records, have {len(normal_idx)}")
    if len(attack_idx) < n_per_side:
        raise ValueError(f"need {n_per_side} attack records, have {len(attack_idx)}")
    rng = np.random.default_rng(seed)
    pick_n = rng.choice(len(normal_idx), size=n_per_side, replace=False)
    pick_a = rng.choice(len(attack_idx), size=n_per_side, replace=False)
    idx = np.concatenate([normal_idx[pick_n], attack_idx[pick_a]])
    return ds.subset(np.sort(idx))


def generate_synthetic(cfg: SyntheticConfig) -> Dataset:
    """Gaussian clusters, one per class, unit within-class stddev.

    Class means are rejection-sampled to sit pairwise at least
    ``class_separation`` apart; the normal class spreads its samples over
    ``normal_modes`` sub-modes placed within a quarter-separation ball.
    Deterministic under ``cfg.seed``.
    """
    rng = np.random.default_rng(cfg.seed)
    sep = cfg.class_separation
    means: list[np.ndarray] = []
    box = sep * max(2.0, cfg.n_classes ** (1.0 / cfg.dim))
    attempts = 0
    while len(means) < cfg.n_classes:
        cand = rng.uniform(-box, box, size=cfg.dim)
        if all(np.linalg.norm(cand - m) >= sep for m in means):
            means.append(cand)
        attempts += 1
        if attempts > 1000 * cfg.n_classes:
            box *= 1.5
            attempts = 0

    classes = CLASS_ORDER[: cfg.n_classes]
    rows, codes = [], []
    for ci, label in enumerate(classes):
        n = cfg.samples_per_class
        if label is ClassLabel.NORMAL and cfg.normal_modes > 1:
            offsets = rng.normal(size=(cfg.normal_modes, cfg.dim))
            norms = np.linalg.norm(offsets, axis=1, keepdims=True)
            offsets = offsets / np.where(norms == 0, 1, norms) * (sep / 4.0)
            per_mode = np.full(cfg.normal_modes, n // cfg.normal_modes)
            per_mode[: n % cfg.normal_modes] += 1
            for mode, m_count in enumerate(per_mode):
                center = means[ci] + offsets[mode]
                rows.append(center + rng.normal(size=(m_count, cfg.dim)))
        else:
            rows.append(means[ci] + rng.normal(size=(n, cfg.dim)))
        codes.extend([code_of(label)] * n)

    X = np.vstack(rows)
    y = np.array(codes, dtype=np.int64)
    width = int(np.ceil(np.log10(max(len(y), 10))))
    ids = np.array([f"syn-{i:0{width}d}" for i in range(len(y))])
    names = [f"f{j:02d}" for j in range(cfg.dim)]
    return Dataset(X=X, y=y, ids=ids, feature_names=names)


def dump_jsonl(ds: Dataset, path: str | Path) -> None:
    """Cache a dataset as JSON-lines (id, label, feature list)."""
    with open(path, "w") as fh:
        for i in range(len(ds)):
            lab = label_of(int(ds.y[i])).value if ds.y[i] != UNLABELED else None
            rec = {"id": str(ds.ids[i]), "label": lab, "features": ds.X[i].tolist()}
            fh.write(json.dumps(rec) + "\n")


def load_jsonl(path: str | Path, feature_names: Optional[list[str]] = None) -> Dataset:
    ids, codes, rows = [], [], []
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            ids.append(rec["id"])
            codes.append(code_of(parse_label(rec["label"])) if rec["label"] else UNLABELED)
            rows.append(rec["features"])
    X = np.asarray(rows, dtype=np.float64)
    if feature_names is None:
        feature_names = [f"f{j:02d}" for j in range(X.shape[1])]
    return Dataset(X=X, y=np.asarray(codes), ids=np.asarray(ids), feature_names=feature_names)


def attack_subset(ds: Dataset) -> Dataset:
    """All records whose ground truth is an attack class."""
    normal_code = code_of(ClassLabel.NORMAL)
    return ds.subset((ds.y != normal_code) & (ds.y != UNLABELED))


def class_subset(ds: Dataset, classes: Sequence[ClassLabel]) -> Dataset:
    codes = {code_of(c) for c in classes}
    return ds.subset(np.isin(ds.y, list(codes)))
