"""CART trees on numeric features.

ClassificationTree splits on Gini impurity and stores leaf class
distributions.  GradientTree fits second-order gradient statistics with L2
leaf regularization: split gain is the usual
G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2) and leaf values are the Newton
step -G/(H+l2).
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np


@dataclasses.dataclass
class _Split:
    feature: int
    threshold: float
    gain: float


def _best_gini_split(X, y_onehot, idx, features):
    """Best (feature, threshold) by Gini over the given feature subset."""
    n = len(idx)
    counts = y_onehot[idx].sum(axis=0)
    parent_gini = 1.0 - np.sum((counts / n) ** 2)
    best: Optional[_Split] = None
    for f in features:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        left = np.cumsum(y_onehot[idx][order], axis=0)[:-1]
        nl = np.arange(1, n)
        nr = n - nl
        valid = vs[1:] != vs[:-1]
        gini_l = 1.0 - np.sum((left / nl[:, None]) ** 2, axis=1)
        right = counts - left
        gini_r = 1.0 - np.sum((right / nr[:, None]) ** 2, axis=1)
        weighted = (nl * gini_l + nr * gini_r) / n
        weighted[~valid] = np.inf
        pos = int(np.argmin(weighted))
        gain = parent_gini - weighted[pos]
        if np.isfinite(weighted[pos]) and gain > 1e-12:
            if best is None or gain > best.gain:
                best = _Split(feature=int(f), threshold=float((vs[pos] + vs[pos + 1]) / 2.0), gain=float(gain))
    return best


@dataclasses.dataclass
class ClassificationTree:
    n_classes: int
    max_depth: Optional[int] = None
    max_features: Optional[int] = None  # per-node subsample; None = all
    min_samples_leaf: int = 1

    def fit(self, X, y, rng: Optional[np.random.Generator] = None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        rng = rng or np.random.default_rng(0)
        onehot = np.zeros((len(y), self.n_classes))
        onehot[np.arange(len(y)), y] = 1.0

        feature, threshold, left, right = [], [], [], []
        leaf_dist = []

        def new_node():
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            leaf_dist.append(None)
            return len(feature) - 1

        stack = [(new_node(), np.arange(len(y)), 0)]
        d = X.shape[1]
        while stack:
            node, idx, depth = stack.pop()
            counts = onehot[idx].sum(axis=0)
            pure = counts.max() == len(idx)
            depth_capped = self.max_depth is not None and depth >= self.max_depth
            split = None
            if not pure and not depth_capped and len(idx) >= 2 * self.min_samples_leaf:
                if self.max_features is not None and self.max_features < d:
                    feats = rng.choice(d, size=self.max_features, replace=False)
                else:
                    feats = np.arange(d)
                split = _best_gini_split(X, onehot, idx, feats)
            if split is None:
                leaf_dist[node] = counts / counts.sum()
                continue
            goes_left = X[idx, split.feature] <= split.threshold
            li, ri = idx[goes_left], idx[~goes_left]
            if len(li) < self.min_samples_leaf or len(ri) < self.min_samples_leaf:
                leaf_dist[node] = counts / counts.sum()
                continue
            feature[node] = split.feature
            threshold[node] = split.threshold
            l_id, r_id = new_node(), new_node()
            left[node], right[node] = l_id, r_id
            stack.append((l_id, li, depth + 1))
            stack.append((r_id, ri, depth + 1))

        self.feature_ = np.asarray(feature, dtype=np.int64)
        self.threshold_ = np.asarray(threshold)
        self.left_ = np.asarray(left, dtype=np.int64)
        self.right_ = np.asarray(right, dtype=np.int64)
        dists = np.zeros((len(feature), self.n_classes))
        for i, dist in enumerate(leaf_dist):
            if dist is not None:
                dists[i] = dist
        self.leaf_dist_ = dists
        return self

    def _leaves(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature_[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            f = self.feature_[node[rows]]
            goes_left = X[rows, f] <= self.threshold_[node[rows]]
            node[rows] = np.where(goes_left, self.left_[node[rows]], self.right_[node[rows]])
            active = self.feature_[node] >= 0
        return node

    def predict_proba(self, X) -> np.ndarray:
        return self.leaf_dist_[self._leaves(X)]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def _best_newton_split(X, g, h, idx, l2):
    n = len(idx)
    G, H = g[idx].sum(), h[idx].sum()
    parent = G * G / (H + l2)
    best: Optional[_Split] = None
    for f in range(X.shape[1]):
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        GL = np.cumsum(g[idx][order])[:-1]
        HL = np.cumsum(h[idx][order])[:-1]
        valid = vs[1:] != vs[:-1]
        GR, HR = G - GL, H - HL
        gain = GL**2 / (HL + l2) + GR**2 / (HR + l2) - parent
        gain[~valid] = -np.inf
        pos = int(np.argmax(gain))
        if gain[pos] > 1e-12:
            if best is None or gain[pos] > best.gain:
                best = _Split(feature=int(f), threshold=float((vs[pos] + vs[pos + 1]) / 2.0), gain=float(gain[pos]))
    return best


@dataclasses.dataclass
class GradientTree:
    max_depth: int = 6
    l2: float = 1.0

    def fit(self, X, g, h):
        X = np.asarray(X, dtype=np.float64)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node():
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            return len(feature) - 1

        stack = [(new_node(), np.arange(len(g)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            split = None
            if depth < self.max_depth and len(idx) >= 2:
                split = _best_newton_split(X, g, h, idx, self.l2)
            if split is None:
                value[node] = -g[idx].sum() / (h[idx].sum() + self.l2)
                continue
            goes_left = X[idx, split.feature] <= split.threshold
            feature[node] = split.feature
            threshold[node] = split.threshold
            l_id, r_id = new_node(), new_node()
            left[node], right[node] = l_id, r_id
            stack.append((l_id, idx[goes_left], depth + 1))
            stack.append((r_id, idx[~goes_left], depth + 1))

        self.feature_ = np.asarray(feature, dtype=np.int64)
        self.threshold_ = np.asarray(threshold)
        self.left_ = np.asarray(left, dtype=np.int64)
        self.right_ = np.asarray(right, dtype=np.int64)
        self.value_ = np.asarray(value)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature_[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            f = self.feature_[node[rows]]
            goes_left = X[rows, f] <= self.threshold_[node[rows]]
            node[rows] = np.where(goes_left, self.left_[node[rows]], self.right_[node[rows]])
            active = self.feature_[node] >= 0
        return self.value_[node]
