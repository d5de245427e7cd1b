"""Incremental attack-class updates: seed newly emerging classes from the
unknown pool, grow the labeled set by self-training, graph label inference,
or uncertainty-driven oracle queries, and retrain the classifier each round
until the pool drains or stalls.

One-step runs absorb all remaining classes at once; multi-step runs follow a
schedule of known/unknown states, either rebuilding each step's training set
from seeds and oracle labels only (seed-based) or carrying accepted
pseudo-labels forward (augmentation).
"""

from __future__ import annotations

import dataclasses
import time
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .classifiers import (
    ClassifierHyper,
    ClassifierKind,
    ClassifierModel,
    DEFAULT_HYPER,
    RfHyper,
    train_classifier,
)
from .data import Dataset
from .labels import ClassLabel, code_of, label_of
from .metrics import MetricBlock, confusion, entropy, multiclass_metrics

PROVENANCES = ("known_pool", "seed", "pseudo_label", "oracle_query")


class Oracle(Protocol):
    """Resolves sample ids to ground-truth labels; None means abstain."""

    def resolve(self, ids: Sequence[str]) -> dict[str, Optional[ClassLabel]]: ...


class DatasetOracle:
    """Experiment oracle: the hidden ground-truth labels of the dataset."""

    def __init__(self, labels: dict[str, ClassLabel]):
        self._labels = dict(labels)

    @staticmethod
    def from_dataset(ds: Dataset) -> "DatasetOracle":
        return DatasetOracle(
            {str(i): label_of(int(c)) for i, c in zip(ds.ids, ds.y) if c >= 0}
        )

    def resolve(self, ids: Sequence[str]) -> dict[str, Optional[ClassLabel]]:
        return {str(i): self._labels.get(str(i)) for i in ids}


class AbstainingOracle:
    """Wraps an oracle, abstaining on a fixed id set (fault injection)."""

    def __init__(self, inner: Oracle, abstain_ids: Sequence[str]):
        self._inner = inner
        self._abstain = set(abstain_ids)

    def resolve(self, ids: Sequence[str]) -> dict[str, Optional[ClassLabel]]:
        out = self._inner.resolve(ids)
        for i in ids:
            if str(i) in self._abstain:
                out[str(i)] = None
        return out


@dataclasses.dataclass
class LabeledSet:
    """Labeled flows plus per-record provenance and acceptance confidence."""

    X: np.ndarray
    y: np.ndarray
    ids: np.ndarray
    provenance: np.ndarray
    confidence: np.ndarray

    @staticmethod
    def empty(dim: int) -> "LabeledSet":
        return LabeledSet(
            X=np.empty((0, dim)),
            y=np.empty(0, dtype=np.int64),
            ids=np.empty(0, dtype=object),
            provenance=np.empty(0, dtype=object),
            confidence=np.empty(0),
        )

    @staticmethod
    def from_dataset(ds: Dataset, provenance: str) -> "LabeledSet":
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        return LabeledSet(
            X=ds.X.copy(),
            y=ds.y.copy(),
            ids=np.array([str(i) for i in ds.ids], dtype=object),
            provenance=np.array([provenance] * len(ds), dtype=object),
            confidence=np.full(len(ds), np.nan),
        )

    def __len__(self) -> int:
        return len(self.y)

    def extend(
        self,
        X: np.ndarray,
        y: np.ndarray,
        ids: Sequence[str],
        provenance: str,
        confidence: Optional[np.ndarray] = None,
    ) -> "LabeledSet":
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        conf = confidence if confidence is not None else np.full(len(y), np.nan)
        return LabeledSet(
            X=np.vstack([self.X, X]) if len(y) else self.X,
            y=np.concatenate([self.y, y]),
            ids=np.concatenate([self.ids, np.array([str(i) for i in ids], dtype=object)]),
            provenance=np.concatenate([self.provenance, np.array([provenance] * len(y), dtype=object)]),
            confidence=np.concatenate([self.confidence, conf]),
        )

    def by_provenance(self) -> dict[str, int]:
        return {p: int(np.sum(self.provenance == p)) for p in PROVENANCES}

    def restricted_to(self, provenances: Sequence[str]) -> "LabeledSet":
        mask = np.isin(self.provenance, list(provenances))
        return LabeledSet(
            X=self.X[mask],
            y=self.y[mask],
            ids=self.ids[mask],
            provenance=self.provenance[mask],
            confidence=self.confidence[mask],
        )


@dataclasses.dataclass
class UnlabeledPool:
    """Unknown-pool flows: features and ids only, labels live with the oracle."""

    X: np.ndarray
    ids: np.ndarray

    @staticmethod
    def from_dataset(ds: Dataset) -> "UnlabeledPool":
        return UnlabeledPool(X=ds.X.copy(), ids=np.array([str(i) for i in ds.ids], dtype=object))

    def __len__(self) -> int:
        return len(self.ids)

    def without(self, remove: Sequence[str]) -> "UnlabeledPool":
        drop = set(str(i) for i in remove)
        keep = np.array([str(i) not in drop for i in self.ids], dtype=bool)
        return UnlabeledPool(X=self.X[keep], ids=self.ids[keep])


@dataclasses.dataclass
class SeedSet:
    X: np.ndarray
    y: np.ndarray
    ids: np.ndarray
    per_class_count: int
    shortfalls: dict[str, int]  # class -> samples actually taken when short


@dataclasses.dataclass
class PseudoLabeledBatch:
    ids: np.ndarray
    X: np.ndarray
    y: np.ndarray
    confidence: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)


@dataclasses.dataclass
class QueryBatch:
    ids: list[str]
    uncertainty: list[float]
    strategy: str
    requested: int

    @property
    def truncated(self) -> bool:
        return len(self.ids) < self.requested

    def __len__(self) -> int:
        return len(self.ids)


@dataclasses.dataclass(frozen=True)
class GraphConfig:
    n_neighbors: int = 7
    rbf_gamma: float = 1.0
    alpha: float = 0.2  # spreading only
    max_nodes: int = 5000
    tol: float = 1e-6
    max_iter: int = 1000


@dataclasses.dataclass(frozen=True)
class ConvergenceConfig:
    min_pool_drain_fraction: float = 0.01
    patience: int = 3


@dataclasses.dataclass(frozen=True)
class UpdateConfig:
    strategy: str = "self_training"
    training_logic: str = "seed_based"
    confidence_threshold: float = 0.9
    per_class_count: int = 20
    al_strategy: str = "entropy"
    al_batch_size: int = 50
    al_budget: int = 500
    max_rounds: int = 20
    convergence: ConvergenceConfig = ConvergenceConfig()
    graph: GraphConfig = GraphConfig()
    classifier: ClassifierKind = ClassifierKind.RANDOM_FOREST
    classifier_hyper: Optional[ClassifierHyper] = None
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in (
            "self_training",
            "label_propagation",
            "label_spreading",
            "active_learning",
        ):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.training_logic not in ("seed_based", "augmentation"):
            raise ValueError(f"unknown training logic {self.training_logic!r}")
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must lie in (0, 1]")

    def resolved_hyper(self) -> ClassifierHyper:
        if self.classifier_hyper is not None:
            return self.classifier_hyper
        if self.classifier is ClassifierKind.RANDOM_FOREST:
            return RfHyper(n_trees=60)
        return DEFAULT_HYPER[self.classifier]()


@dataclasses.dataclass
class IterationReport:
    round_index: int
    step_label: str
    labeled_by_provenance: dict[str, int]
    unknown_remaining: int
    abstained_total: int
    accepted_this_round: int
    metrics: MetricBlock
    wall_clock: float
    al_budget_left: Optional[int] = None

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["metrics"] = self.metrics.to_dict()
        return out


@dataclasses.dataclass
class StepReport:
    step_index: int
    step_label: str
    n_known: int
    training_logic: str
    rounds: list[IterationReport]
    seed_based_candidate_ids: list[str]
    augmentation_candidate_ids: list[str]
    final_metrics: MetricBlock

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["rounds"] = [r.to_dict() for r in self.rounds]
        out["final_metrics"] = self.final_metrics.to_dict()
        return out


def _derived_seed(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(parts)))


def init_seed_set(
    pool: UnlabeledPool,
    oracle: Oracle,
    new_classes: Sequence[ClassLabel],
    per_class_count: int,
    seed: int,
    step_index: int = 0,
) -> tuple[SeedSet, UnlabeledPool]:
    """Draw a uniform seeded sample per new class from the pool, labeled by
    the oracle; classes short on pool samples are reported, not fatal."""
    resolved = oracle.resolve(list(pool.ids))
    order = np.argsort([str(i) for i in pool.ids], kind="stable")
    xs, ys, ids = [], [], []
    shortfalls: dict[str, int] = {}
    for cls in sorted(new_classes, key=lambda c: c.value):
        members = [i for i in order if resolved.get(str(pool.ids[i])) == cls]
        rng = _derived_seed(seed, step_index, code_of(cls))
        take_n = min(per_class_count, len(members))
        if take_n < per_class_count:
            shortfalls[cls.value] = take_n
        if take_n == 0:
            continue
        picked = rng.choice(len(members), size=take_n, replace=False)
        for p in sorted(picked.tolist()):
            i = members[p]
            xs.append(pool.X[i])
            ys.append(code_of(cls))
            ids.append(str(pool.ids[i]))
    seed_set = SeedSet(
        X=np.array(xs) if xs else np.empty((0, pool.X.shape[1])),
        y=np.array(ys, dtype=np.int64),
        ids=np.array(ids, dtype=object),
        per_class_count=per_class_count,
        shortfalls=shortfalls,
    )
    return seed_set, pool.without(ids)


def self_training_round(
    clf: ClassifierModel, pool: UnlabeledPool, threshold: float
) -> tuple[PseudoLabeledBatch, UnlabeledPool]:
    """Accept every pool sample whose top predicted probability clears the
    threshold, labeled by the argmax class."""
    if len(pool) == 0:
        empty = PseudoLabeledBatch(
            ids=np.empty(0, dtype=object),
            X=np.empty((0, pool.X.shape[1] if pool.X.ndim == 2 else 0)),
            y=np.empty(0, dtype=np.int64),
            confidence=np.empty(0),
        )
        return empty, pool
    proba = clf.predict_proba_batch(pool.X)
    conf = proba.max(axis=1)
    top = proba.argmax(axis=1)
    accept = conf >= threshold
    batch = PseudoLabeledBatch(
        ids=pool.ids[accept].copy(),
        X=pool.X[accept].copy(),
        y=np.array([code_of(clf.classes[t]) for t in top[accept]], dtype=np.int64),
        confidence=conf[accept].copy(),
    )
    return batch, pool.without(batch.ids)


@dataclasses.dataclass
class GraphInferenceResult:
    pool_ids: np.ndarray
    distributions: np.ndarray  # rows align with pool_ids
    labeled_distributions: np.ndarray
    n_iterations: int
    residual: float


def graph_label_inference(
    labeled: LabeledSet,
    pool: UnlabeledPool,
    classes: Sequence[ClassLabel],
    cfg: GraphConfig,
    variant: str,
    seed: int = 0,
) -> GraphInferenceResult:
    """Diffuse labels over a symmetrized kNN affinity graph with RBF weights.

    ``propagation`` clamps labeled rows each sweep; ``spreading`` mixes the
    diffused solution with the initial labels at coefficient alpha.  Pool
    nodes in a component with no labeled member get a uniform distribution.
    """
    if variant not in ("propagation", "spreading"):
        raise ValueError(f"unknown variant {variant!r}")
    if len(labeled) == 0:
        raise ValueError("graph inference needs at least one labeled sample")

    class_index = {code_of(c): k for k, c in enumerate(classes)}
    K = len(classes)

    # Cap graph size: all labeled rows first (subsampled if they alone bust
    # the cap), remainder of the budget to the pool.
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104729]))
    lab_idx = np.arange(len(labeled))
    if len(labeled) > cfg.max_nodes // 2 and len(labeled) + len(pool) > cfg.max_nodes:
        lab_idx = np.sort(rng.choice(len(labeled), size=cfg.max_nodes // 2, replace=False))
    pool_budget = cfg.max_nodes - len(lab_idx)
    pool_idx = np.arange(len(pool))
    if len(pool) > pool_budget:
        pool_idx = np.sort(rng.choice(len(pool), size=pool_budget, replace=False))

    X = np.vstack([labeled.X[lab_idx], pool.X[pool_idx]])
    n = len(X)
    n_lab = len(lab_idx)
    k = min(cfg.n_neighbors, n - 1)

    D2 = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(D2, np.inf)
    nn = np.argpartition(D2, k - 1, axis=1)[:, :k]
    W = np.zeros((n, n))
    rows = np.repeat(np.arange(n), k)
    cols = nn.ravel()
    W[rows, cols] = np.exp(-cfg.rbf_gamma * D2[rows, cols])
    W = np.maximum(W, W.T)  # union symmetrization

    Y0 = np.zeros((n, K))
    for r, li in enumerate(lab_idx):
        Y0[r, class_index[int(labeled.y[li])]] = 1.0

    deg = W.sum(axis=1)
    safe = np.where(deg > 0, deg, 1.0)
    Y = Y0.copy()
    residual = np.inf
    iterations = 0
    if variant == "propagation":
        T = W / safe[:, None]
        for iterations in range(1, cfg.max_iter + 1):
            Y_new = T @ Y
            Y_new[:n_lab] = Y0[:n_lab]
            residual = float(np.max(np.abs(Y_new - Y)))
            Y = Y_new
            if residual < cfg.tol:
                break
    else:
        d_inv_sqrt = 1.0 / np.sqrt(safe)
        S = W * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]
        for iterations in range(1, cfg.max_iter + 1):
            Y_new = cfg.alpha * (S @ Y) + (1.0 - cfg.alpha) * Y0
            residual = float(np.max(np.abs(Y_new - Y)))
            Y = Y_new
            if residual < cfg.tol:
                break

    sums = Y.sum(axis=1, keepdims=True)
    dist = np.where(sums > 0, Y / np.where(sums == 0, 1.0, sums), 1.0 / K)
    return GraphInferenceResult(
        pool_ids=pool.ids[pool_idx].copy(),
        distributions=dist[n_lab:],
        labeled_distributions=dist[:n_lab],
        n_iterations=iterations,
        residual=residual,
    )


def graph_round(
    labeled: LabeledSet,
    pool: UnlabeledPool,
    classes: Sequence[ClassLabel],
    cfg: GraphConfig,
    variant: str,
    threshold: float,
    seed: int = 0,
) -> tuple[PseudoLabeledBatch, UnlabeledPool]:
    """One graph-inference round feeding the same accept/remove update as
    self-training."""
    result = graph_label_inference(labeled, pool, classes, cfg, variant, seed)
    conf = result.distributions.max(axis=1)
    top = result.distributions.argmax(axis=1)
    accept = conf >= threshold
    ids = result.pool_ids[accept]
    id_to_row = {str(i): r for r, i in enumerate(pool.ids)}
    row_idx = np.array([id_to_row[str(i)] for i in ids], dtype=np.int64)
    batch = PseudoLabeledBatch(
        ids=ids.copy(),
        X=pool.X[row_idx].copy() if len(row_idx) else np.empty((0, pool.X.shape[1])),
        y=np.array([code_of(classes[t]) for t in top[accept]], dtype=np.int64),
        confidence=conf[accept].copy(),
    )
    return batch, pool.without(batch.ids)


def al_select(
    clf: ClassifierModel, pool: UnlabeledPool, strategy: str, batch: int
) -> QueryBatch:
    """Top-``batch`` pool samples by uncertainty, ties broken by id."""
    if strategy not in ("least_confidence", "margin", "entropy"):
        raise ValueError(f"unknown AL strategy {strategy!r}")
    if len(pool) == 0:
        return QueryBatch(ids=[], uncertainty=[], strategy=strategy, requested=batch)
    proba = clf.predict_proba_batch(pool.X)
    if strategy == "least_confidence":
        u = 1.0 - proba.max(axis=1)
    elif strategy == "margin":
        part = np.sort(proba, axis=1)
        u = -(part[:, -1] - part[:, -2])
    else:
        u = np.array([entropy(p) for p in proba])
    take = min(batch, len(pool))
    order = np.lexsort((np.array([str(i) for i in pool.ids]), -u))[:take]
    return QueryBatch(
        ids=[str(pool.ids[i]) for i in order],
        uncertainty=[float(u[i]) for i in order],
        strategy=strategy,
        requested=batch,
    )


def al_ingest(
    query: QueryBatch, oracle: Oracle, pool: UnlabeledPool
) -> tuple[PseudoLabeledBatch, list[str], UnlabeledPool]:
    """Resolve queries against the oracle; abstentions stay in the pool."""
    resolved = oracle.resolve(query.ids)
    id_to_row = {str(i): r for r, i in enumerate(pool.ids)}
    taken_ids, taken_rows, codes = [], [], []
    abstained: list[str] = []
    for qid in query.ids:
        label = resolved.get(qid)
        if label is None:
            abstained.append(qid)
            continue
        taken_ids.append(qid)
        taken_rows.append(id_to_row[qid])
        codes.append(code_of(label))
    batch = PseudoLabeledBatch(
        ids=np.array(taken_ids, dtype=object),
        X=pool.X[np.array(taken_rows, dtype=np.int64)] if taken_rows else np.empty((0, pool.X.shape[1])),
        y=np.array(codes, dtype=np.int64),
        confidence=np.full(len(taken_ids), np.nan),
    )
    return batch, abstained, pool.without(taken_ids)


def check_convergence(
    pool_start: int,
    pool_sizes: list[int],
    cfg: ConvergenceConfig,
    budget_left: Optional[int] = None,
) -> bool:
    """Converged when the pool drained below the start-size fraction, stalled
    for ``patience`` rounds, or (active learning) the budget ran out."""
    if not pool_sizes:
        return False
    remaining = pool_sizes[-1]
    if pool_start == 0 or remaining <= cfg.min_pool_drain_fraction * pool_start:
        return True
    if len(pool_sizes) >= cfg.patience:
        tail = pool_sizes[-cfg.patience :]
        prev = pool_sizes[-cfg.patience - 1] if len(pool_sizes) > cfg.patience else pool_start
        if all(s == prev for s in tail):
            return True
    if budget_left is not None and budget_left <= 0:
        return True
    return False


def _evaluate(
    clf: ClassifierModel, test: Dataset, classes: Sequence[ClassLabel]
) -> MetricBlock:
    codes = [code_of(c) for c in classes]
    mask = np.isin(test.y, codes)
    if not mask.any():
        return MetricBlock()
    truth = [label_of(int(c)) for c in test.y[mask]]
    preds = clf.predict_batch(test.X[mask])
    return multiclass_metrics(confusion(truth, preds, list(classes)))


def _assert_no_leakage(test: Dataset, labeled: LabeledSet, pool: UnlabeledPool) -> None:
    test_ids = set(str(i) for i in test.ids)
    used = set(str(i) for i in labeled.ids) | set(str(i) for i in pool.ids)
    overlap = test_ids & used
    if overlap:
        raise RuntimeError(f"test leakage: {sorted(overlap)[:5]}")


def _retrain(
    labeled: LabeledSet, classes: list[ClassLabel], cfg: UpdateConfig, step: int, rnd: int
) -> ClassifierModel:
    seed = int(np.random.SeedSequence([cfg.seed, step, rnd, 7]).generate_state(1)[0])
    return train_classifier(
        cfg.classifier, labeled.X, labeled.y, classes=classes,
        hyper=cfg.resolved_hyper(), seed=seed,
    )


def _run_rounds(
    labeled: LabeledSet,
    pool: UnlabeledPool,
    classes: list[ClassLabel],
    oracle: Oracle,
    test: Dataset,
    cfg: UpdateConfig,
    step_label: str,
    step_index: int,
) -> tuple[list[IterationReport], LabeledSet, UnlabeledPool, ClassifierModel]:
    """The shared round loop of the update procedure."""
    clf = _retrain(labeled, classes, cfg, step_index, 0)
    pool_start = len(pool)
    pool_sizes: list[int] = []
    budget_left = cfg.al_budget if cfg.strategy == "active_learning" else None
    abstained_total = 0
    reports: list[IterationReport] = []

    for rnd in range(1, cfg.max_rounds + 1):
        t0 = time.perf_counter()
        accepted = 0
        if cfg.strategy == "self_training":
            batch, pool = self_training_round(clf, pool, cfg.confidence_threshold)
            labeled = labeled.extend(batch.X, batch.y, batch.ids, "pseudo_label", batch.confidence)
            accepted = len(batch)
        elif cfg.strategy in ("label_propagation", "label_spreading"):
            variant = "propagation" if cfg.strategy == "label_propagation" else "spreading"
            batch, pool = graph_round(
                labeled, pool, classes, cfg.graph, variant,
                cfg.confidence_threshold, seed=cfg.seed + rnd,
            )
            labeled = labeled.extend(batch.X, batch.y, batch.ids, "pseudo_label", batch.confidence)
            accepted = len(batch)
        else:
            ask = min(cfg.al_batch_size, budget_left or 0)
            if ask > 0:
                query = al_select(clf, pool, cfg.al_strategy, ask)
                batch, abstained, pool = al_ingest(query, oracle, pool)
                labeled = labeled.extend(batch.X, batch.y, batch.ids, "oracle_query")
                accepted = len(batch)
                abstained_total += len(abstained)
                budget_left -= len(query)

        clf = _retrain(labeled, classes, cfg, step_index, rnd)
        _assert_no_leakage(test, labeled, pool)
        metrics = _evaluate(clf, test, classes)
        pool_sizes.append(len(pool))
        reports.append(
            IterationReport(
                round_index=rnd,
                step_label=step_label,
                labeled_by_provenance=labeled.by_provenance(),
                unknown_remaining=len(pool),
                abstained_total=abstained_total,
                accepted_this_round=accepted,
                metrics=metrics,
                wall_clock=time.perf_counter() - t0,
                al_budget_left=budget_left,
            )
        )
        if check_convergence(pool_start, pool_sizes, cfg.convergence, budget_left):
            break
    return reports, labeled, pool, clf


def run_one_step(
    known_classes: Sequence[ClassLabel],
    new_classes: Sequence[ClassLabel],
    known_train: Dataset,
    pool: UnlabeledPool,
    oracle: Oracle,
    test: Dataset,
    cfg: UpdateConfig,
) -> list[IterationReport]:
    """Absorb all new classes in one update: seed each, then loop rounds
    until convergence.  The final report evaluates the expanded classifier
    on the held-out test set."""
    known_sorted = sorted(known_classes, key=lambda c: code_of(c))
    new_sorted = sorted(new_classes, key=lambda c: code_of(c))
    classes = sorted(set(known_sorted) | set(new_sorted), key=lambda c: code_of(c))

    labeled = LabeledSet.from_dataset(known_train, "known_pool")
    seeds, pool = init_seed_set(pool, oracle, new_sorted, cfg.per_class_count, cfg.seed)
    labeled = labeled.extend(seeds.X, seeds.y, seeds.ids, "seed")
    _assert_no_leakage(test, labeled, pool)

    reports, _, _, _ = _run_rounds(
        labeled, pool, classes, oracle, test, cfg,
        step_label=f"{len(known_sorted)}K+{len(new_sorted)}U", step_index=0,
    )
    return reports


def run_multi_step(
    schedule: Sequence[tuple[int, int]],
    class_order: Sequence[ClassLabel],
    known_train: Dataset,
    pool: UnlabeledPool,
    oracle: Oracle,
    test: Dataset,
    cfg: UpdateConfig,
) -> list[StepReport]:
    """Progressive class emergence along a schedule of (n_known, n_unknown)
    states; each transition seeds that step's new classes and runs the
    update loop.

    Per ``cfg.training_logic``, each step's starting labeled set is either
    the known-pool data plus all seed and oracle labels accumulated so far
    (seed-based) or the same plus all pseudo-labels accepted in earlier
    steps (augmentation).  Both candidate id sets are recorded per step.
    """
    counts = [k for k, _ in schedule]
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("schedule must strictly increase n_known")
    if counts[-1] != len(class_order):
        raise ValueError("schedule must end with every class known")
    if len(schedule) < 2:
        raise ValueError("schedule needs at least a start and an end state")

    base = LabeledSet.from_dataset(known_train, "known_pool")
    sticky = LabeledSet.empty(known_train.dim)  # seeds + oracle labels, kept by both logics
    carried_pseudo = LabeledSet.empty(known_train.dim)
    step_reports: list[StepReport] = []

    for step_index in range(1, len(schedule)):
        k_prev, u_prev = schedule[step_index - 1]
        k_next = schedule[step_index][0]
        new_classes = list(class_order[k_prev:k_next])
        classes = sorted(class_order[:k_next], key=lambda c: code_of(c))

        seeds, pool = init_seed_set(
            pool, oracle, new_classes, cfg.per_class_count, cfg.seed, step_index=step_index
        )
        sticky = sticky.extend(seeds.X, seeds.y, seeds.ids, "seed")

        seed_based = LabeledSet(
            X=np.vstack([base.X, sticky.X]),
            y=np.concatenate([base.y, sticky.y]),
            ids=np.concatenate([base.ids, sticky.ids]),
            provenance=np.concatenate([base.provenance, sticky.provenance]),
            confidence=np.concatenate([base.confidence, sticky.confidence]),
        )
        augmentation = LabeledSet(
            X=np.vstack([seed_based.X, carried_pseudo.X]),
            y=np.concatenate([seed_based.y, carried_pseudo.y]),
            ids=np.concatenate([seed_based.ids, carried_pseudo.ids]),
            provenance=np.concatenate([seed_based.provenance, carried_pseudo.provenance]),
            confidence=np.concatenate([seed_based.confidence, carried_pseudo.confidence]),
        )
        labeled = seed_based if cfg.training_logic == "seed_based" else augmentation

        step_label = f"{k_prev}K+{u_prev}U"
        rounds, labeled_after, pool, _ = _run_rounds(
            labeled, pool, classes, oracle, test, cfg, step_label, step_index
        )

        all_oracle = labeled_after.restricted_to(["oracle_query"])
        already = set(str(i) for i in sticky.ids)
        fresh = np.array([str(i) not in already for i in all_oracle.ids], dtype=bool)
        sticky = sticky.extend(
            all_oracle.X[fresh], all_oracle.y[fresh], all_oracle.ids[fresh], "oracle_query"
        )
        carried_pseudo = labeled_after.restricted_to(["pseudo_label"])

        step_reports.append(
            StepReport(
                step_index=step_index,
                step_label=step_label,
                n_known=k_next,
                training_logic=cfg.training_logic,
                rounds=rounds,
                seed_based_candidate_ids=sorted(str(i) for i in seed_based.ids),
                augmentation_candidate_ids=sorted(str(i) for i in augmentation.ids),
                final_metrics=rounds[-1].metrics if rounds else MetricBlock(),
            )
        )
    return step_reports
