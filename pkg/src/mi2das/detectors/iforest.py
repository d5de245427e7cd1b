"""Isolation forest: trees isolate samples by random axis-aligned cuts;
short average path lengths mark anomalies.

The anomaly score is the standard 2^(-E[h(x)]/c(psi)) in (0, 1), with the
expected-path normalizer c computed from exact harmonic sums.  Model scores
are the negated anomaly score so that higher means more normal.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np


@dataclasses.dataclass(frozen=True)
class IforestHyper:
    n_trees: int = 100
    subsample: int = 256
    max_depth: Optional[int] = None  # None = ceil(log2(subsample))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.subsample < 1:
            raise ValueError("n_trees and subsample must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive when set")


def harmonic(m: int) -> float:
    """Exact harmonic number H(m) = sum_{i=1..m} 1/i."""
    if m < 1:
        return 0.0
    return float(np.sum(1.0 / np.arange(1, m + 1)))


def expected_path_length(n: int) -> float:
    """Average path length of an unsuccessful BST search over n points."""
    if n <= 1:
        return 0.0
    return 2.0 * harmonic(n - 1) - 2.0 * (n - 1) / n


@dataclasses.dataclass
class _Tree:
    # Flat arrays; leaves have feature == -1 and carry their sample count.
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            f = self.feature[node[idx]]
            goes_left = X[idx, f] < self.threshold[node[idx]]
            node[idx] = np.where(goes_left, self.left[node[idx]], self.right[node[idx]])
            active = self.feature[node] >= 0
        leaf_size = self.size[node]
        adjust = np.array([expected_path_length(int(s)) for s in leaf_size])
        return self.depth[node] + adjust


@dataclasses.dataclass
class IforestState:
    trees: list[_Tree]
    subsample: int
    c_norm: float  # c(subsample), the per-tree expected-path normalizer

    def anomaly_score(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        depths = np.mean([t.path_lengths(X) for t in self.trees], axis=0)
        return np.power(2.0, -depths / self.c_norm)

    def score(self, X: np.ndarray) -> np.ndarray:
        return -self.anomaly_score(X)


def _build_tree(X: np.ndarray, max_depth: int, rng: np.random.Generator) -> _Tree:
    feature, threshold, left, right, size, depth = [], [], [], [], [], []

    def new_node(d: int, n: int) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        size.append(n)
        depth.append(d)
        return len(feature) - 1

    stack = [(new_node(0, len(X)), np.arange(len(X)), 0)]
    while stack:
        node_id, idx, d = stack.pop()
        if len(idx) <= 1 or d >= max_depth:
            continue
        lo = X[idx].min(axis=0)
        hi = X[idx].max(axis=0)
        usable = np.flatnonzero(hi > lo)
        if len(usable) == 0:
            continue  # all duplicate rows
        f = int(rng.choice(usable))
        t = float(rng.uniform(lo[f], hi[f]))
        goes_left = X[idx, f] < t
        feature[node_id] = f
        threshold[node_id] = t
        l_id = new_node(d + 1, int(goes_left.sum()))
        r_id = new_node(d + 1, int((~goes_left).sum()))
        left[node_id] = l_id
        right[node_id] = r_id
        stack.append((l_id, idx[goes_left], d + 1))
        stack.append((r_id, idx[~goes_left], d + 1))

    return _Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        size=np.asarray(size, dtype=np.int64),
        depth=np.asarray(depth, dtype=np.float64),
    )


def fit_iforest(X: np.ndarray, hyper: IforestHyper) -> IforestState:
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if hyper.subsample > n:
        raise ValueError(f"subsample={hyper.subsample} exceeds training size {n}")
    psi = hyper.subsample
    max_depth = hyper.max_depth or int(np.ceil(np.log2(max(psi, 2))))
    rng = np.random.default_rng(hyper.seed)
    trees = []
    for _ in range(hyper.n_trees):
        take = rng.choice(n, size=psi, replace=False)
        trees.append(_build_tree(X[take], max_depth, rng))
    return IforestState(trees=trees, subsample=psi, c_norm=expected_path_length(psi))
