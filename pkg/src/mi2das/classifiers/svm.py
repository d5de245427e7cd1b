"""Kernel SVM: binary soft-margin C-SVC solved by SMO with maximal-violating
pair selection, combined one-vs-rest for multiclass.  Class probabilities are
the softmax of the per-class decision values."""

from __future__ import annotations

import dataclasses
from collections import OrderedDict
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist


@dataclasses.dataclass(frozen=True)
class SvmHyper:
    C: float = 1.0
    kernel: str = "rbf"
    gamma: Optional[float] = None  # None = 1/(dim * overall feature variance)
    tol: float = 1e-3
    max_iter: int = 100_000

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kernel!r}")


def _kernel(A, B, kind, gamma):
    if kind == "linear":
        return A @ B.T
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


class _RowCache:
    def __init__(self, X, kind, gamma, capacity=4096):
        self.X, self.kind, self.gamma, self.capacity = X, kind, gamma, capacity
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i):
        r = self._rows.get(i)
        if r is not None:
            self._rows.move_to_end(i)
            return r
        r = _kernel(self.X[i : i + 1], self.X, self.kind, self.gamma)[0]
        self._rows[i] = r
        if len(self._rows) > self.capacity:
            self._rows.popitem(last=False)
        return r


def _smo_binary(X, y, C, kind, gamma, tol, max_iter):
    """Solve min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0 with Q_ij = y_i y_j K_ij."""
    n = len(y)
    cache = _RowCache(X, kind, gamma)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # G = Q a - e
    it = 0
    while it < max_iter:
        v = -y * grad
        up = (y > 0) & (alpha < C) | (y < 0) & (alpha > 0)
        low = (y > 0) & (alpha > 0) | (y < 0) & (alpha < C)
        if not up.any() or not low.any():
            break
        vi = np.where(up, v, -np.inf)
        vj = np.where(low, v, np.inf)
        i = int(np.argmax(vi))
        j = int(np.argmin(vj))
        if vi[i] - vj[j] < tol:
            break

        Ki, Kj = cache.row(i), cache.row(j)
        Qi = y[i] * y * Ki
        Qj = y[j] * y * Kj
        old_i, old_j = alpha[i], alpha[j]
        # Curvature along the feasible direction is the kernel-space squared
        # distance in both label configurations.
        if y[i] != y[j]:
            quad = Ki[i] + Kj[j] - 2.0 * Ki[j]
            quad = max(quad, 1e-12)
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0 and alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = diff
            elif diff <= 0 and alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = Ki[i] + Kj[j] - 2.0 * Ki[j]
            quad = max(quad, 1e-12)
            delta = (grad[i] - grad[j]) / quad
            pair_sum = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            lo = max(0.0, pair_sum - C)
            hi = min(C, pair_sum)
            alpha[j] = float(np.clip(alpha[j], lo, hi))
            alpha[i] = pair_sum - alpha[j]
        grad += Qi * (alpha[i] - old_i) + Qj * (alpha[j] - old_j)
        it += 1

    v = -y * grad
    free = (alpha > 1e-12) & (alpha < C * (1 - 1e-12))
    if free.any():
        b = float(np.mean(v[free]))
    else:
        up = (y > 0) & (alpha < C) | (y < 0) & (alpha > 0)
        low = (y > 0) & (alpha > 0) | (y < 0) & (alpha < C)
        hi = v[up].max() if up.any() else v.min()
        lo = v[low].min() if low.any() else v.max()
        b = float((hi + lo) / 2.0)

    sv = alpha > 1e-12
    return alpha[sv] * y[sv], np.flatnonzero(sv), b, it


@dataclasses.dataclass
class SvmState:
    coef: list[np.ndarray]     # per class: alpha_i * y_i over its SVs
    sv_X: list[np.ndarray]
    bias: list[float]
    kernel: str
    gamma: float
    n_iter: list[int]

    def decision_values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        cols = []
        for coef, sx, b in zip(self.coef, self.sv_X, self.bias):
            if len(coef) == 0:
                cols.append(np.full(len(X), b))
            else:
                cols.append(_kernel(X, sx, self.kernel, self.gamma) @ coef + b)
        return np.column_stack(cols)

    def predict_proba(self, X) -> np.ndarray:
        Z = self.decision_values(X)
        Z = Z - Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        return P / P.sum(axis=1, keepdims=True)


def fit_svm(X, y, n_classes: int, hyper: SvmHyper, seed: int = 0) -> SvmState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if hyper.kernel == "rbf":
        var = float(X.var())
        gamma = hyper.gamma if hyper.gamma is not None else (1.0 / (X.shape[1] * var) if var > 0 else 1.0)
    else:
        gamma = 0.0
    coef, sv_X, bias, iters = [], [], [], []
    for k in range(n_classes):
        yk = np.where(y == k, 1.0, -1.0)
        ck, sv_idx, b, it = _smo_binary(X, yk, hyper.C, hyper.kernel, gamma, hyper.tol, hyper.max_iter)
        coef.append(ck)
        sv_X.append(X[sv_idx])
        bias.append(b)
        iters.append(it)
    return SvmState(coef=coef, sv_X=sv_X, bias=bias, kernel=hyper.kernel, gamma=gamma, n_iter=iters)
