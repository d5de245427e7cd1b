"""Bootstrap-aggregated CART trees with per-node sqrt(dim) feature sampling."""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np

from .tree import ClassificationTree


@dataclasses.dataclass(frozen=True)
class RfHyper:
    n_trees: int = 200
    max_depth: Optional[int] = None
    max_features: str | int | None = "sqrt"
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")


@dataclasses.dataclass
class RandomForestState:
    trees: list[ClassificationTree]
    n_classes: int

    def predict_proba(self, X) -> np.ndarray:
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)


def _resolve_max_features(spec, dim: int) -> Optional[int]:
    if spec is None:
        return None
    if spec == "sqrt":
        return max(1, int(np.sqrt(dim)))
    return int(spec)


def fit_forest(X, y, n_classes: int, hyper: RfHyper, seed: int = 0) -> RandomForestState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    max_features = _resolve_max_features(hyper.max_features, X.shape[1])
    seeds = np.random.SeedSequence(seed).spawn(hyper.n_trees)
    trees = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        if hyper.bootstrap:
            take = rng.integers(0, len(y), size=len(y))
        else:
            take = np.arange(len(y))
        tree = ClassificationTree(
            n_classes=n_classes, max_depth=hyper.max_depth, max_features=max_features
        )
        tree.fit(X[take], y[take], rng=rng)
        trees.append(tree)
    return RandomForestState(trees=trees, n_classes=n_classes)
