"""Gradient-boosted trees on second-order statistics of the multiclass
cross-entropy, one regression tree per class per round, additive scores
starting from a uniform prior (all-zero margins)."""

from __future__ import annotations

import dataclasses

import numpy as np

from .tree import GradientTree


@dataclasses.dataclass(frozen=True)
class GbtHyper:
    n_rounds: int = 200
    max_depth: int = 6
    learning_rate: float = 0.1
    l2: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 1 or self.max_depth < 1:
            raise ValueError("n_rounds and max_depth must be positive")
        if self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError("learning_rate must be positive, l2 non-negative")


def _softmax(F: np.ndarray) -> np.ndarray:
    z = F - F.max(axis=1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=1, keepdims=True)


@dataclasses.dataclass
class GbtState:
    rounds: list[list[GradientTree]]  # rounds[t][k]
    n_classes: int
    learning_rate: float
    loss_history: list[float]

    def raw_scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        F = np.zeros((len(X), self.n_classes))
        for trees in self.rounds:
            for k, tree in enumerate(trees):
                F[:, k] += self.learning_rate * tree.predict(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.raw_scores(X))


def fit_gbt(X, y, n_classes: int, hyper: GbtHyper, seed: int = 0) -> GbtState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0

    F = np.zeros((n, n_classes))
    rounds: list[list[GradientTree]] = []
    loss_history: list[float] = []
    for _ in range(hyper.n_rounds):
        P = _softmax(F)
        loss_history.append(float(-np.mean(np.log(np.clip(P[np.arange(n), y], 1e-300, None)))))
        trees_k = []
        for k in range(n_classes):
            g = P[:, k] - Y[:, k]
            h = P[:, k] * (1.0 - P[:, k])
            tree = GradientTree(max_depth=hyper.max_depth, l2=hyper.l2).fit(X, g, h)
            trees_k.append(tree)
            F[:, k] += hyper.learning_rate * tree.predict(X)
        rounds.append(trees_k)
    P = _softmax(F)
    loss_history.append(float(-np.mean(np.log(np.clip(P[np.arange(n), y], 1e-300, None)))))
    return GbtState(
        rounds=rounds,
        n_classes=n_classes,
        learning_rate=hyper.learning_rate,
        loss_history=loss_history,
    )
