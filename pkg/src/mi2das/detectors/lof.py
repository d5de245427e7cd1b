"""Local outlier factor with exact neighbor search.

Neighborhoods follow the classic definition: the k-distance of a point is the
distance to its k-th nearest neighbor, and the neighborhood contains every
point within that distance (ties included, so it can exceed k members).
Scores are negated LOF values so that higher means more normal.

Fit-time factors exclude the point itself; query scoring treats the query as
external to the training set.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.spatial.distance import cdist

_CHUNK = 2048


@dataclasses.dataclass(frozen=True)
class LofHyper:
    k: int = 20

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclasses.dataclass
class LofState:
    X: np.ndarray
    k: int
    kdist: np.ndarray      # k-distance of each training point (self excluded)
    lrd: np.ndarray        # local reachability density of each training point
    train_lof: np.ndarray  # in-sample factors, self excluded

    def score(self, X: np.ndarray) -> np.ndarray:
        return -self.query_lof(X)

    def query_lof(self, Q: np.ndarray) -> np.ndarray:
        """LOF of query points measured against the training set."""
        Q = np.atleast_2d(Q)
        out = np.empty(len(Q))
        for start in range(0, len(Q), _CHUNK):
            block = Q[start : start + _CHUNK]
            D = cdist(block, self.X)
            kd = np.partition(D, self.k - 1, axis=1)[:, self.k - 1]
            for r in range(len(block)):
                nbrs = np.flatnonzero(D[r] <= kd[r])
                reach = np.maximum(self.kdist[nbrs], D[r, nbrs])
                lrd_q = 1.0 / np.mean(reach)
                out[start + r] = np.mean(self.lrd[nbrs]) / lrd_q
        return out


def fit_lof(X: np.ndarray, hyper: LofHyper) -> LofState:
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if hyper.k >= n:
        raise ValueError(f"k={hyper.k} must be smaller than the training size {n}")
    k = hyper.k

    kdist = np.empty(n)
    neighborhoods: list[np.ndarray] = []
    neighbor_dists: list[np.ndarray] = []
    for start in range(0, n, _CHUNK):
        block = slice(start, min(start + _CHUNK, n))
        D = cdist(X[block], X)
        rows = np.arange(start, block.stop)
        D[np.arange(len(rows)), rows] = np.inf  # exclude self
        kd = np.partition(D, k - 1, axis=1)[:, k - 1]
        kdist[block] = kd
        for r in range(len(rows)):
            nbrs = np.flatnonzero(D[r] <= kd[r])
            neighborhoods.append(nbrs)
            neighbor_dists.append(D[r, nbrs])

    lrd = np.empty(n)
    for i, nbrs in enumerate(neighborhoods):
        reach = np.maximum(kdist[nbrs], neighbor_dists[i])
        lrd[i] = 1.0 / np.mean(reach)

    train_lof = np.empty(n)
    for i, nbrs in enumerate(neighborhoods):
        train_lof[i] = np.mean(lrd[nbrs]) / lrd[i]

    return LofState(X=X, k=k, kdist=kdist, lrd=lrd, train_lof=train_lof)
