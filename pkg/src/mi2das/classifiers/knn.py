"""k-nearest-neighbor classifier: stored standardized training set, exact
neighbor search, neighbor-vote probability fractions."""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.spatial.distance import cdist


@dataclasses.dataclass(frozen=True)
class KnnHyper:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclasses.dataclass
class KnnState:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        k = min(self.k, len(self.X))
        out = np.zeros((len(X), self.n_classes))
        for start in range(0, len(X), 2048):
            block = slice(start, min(start + 2048, len(X)))
            D = cdist(X[block], self.X)
            # Stable sort breaks distance ties by training-sample order.
            nbrs = np.argsort(D, axis=1, kind="stable")[:, :k]
            for r, row in enumerate(nbrs):
                votes = np.bincount(self.y[row], minlength=self.n_classes)
                out[start + r] = votes / k
        return out


def fit_knn(X, y, n_classes: int, hyper: KnnHyper, seed: int = 0) -> KnnState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    return KnnState(X=X, y=y, k=hyper.k, n_classes=n_classes)
