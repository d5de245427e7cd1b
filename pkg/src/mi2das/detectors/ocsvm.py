"""One-class support vector machine solved by SMO on the one-class dual:

    min 1/2 a'Qa   s.t.  0 <= a_i <= 1/(nu*n),  sum a = 1

with Q the kernel Gram matrix.  Pair updates pick the maximal violating pair
and preserve the sum constraint exactly.  The decision value (signed distance
to the learned boundary) is the score: higher means more normal.
"""

from __future__ import annotations

import dataclasses
from collections import OrderedDict
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist


@dataclasses.dataclass(frozen=True)
class OcsvmHyper:
    nu: float = 0.1
    kernel: str = "rbf"
    gamma: Optional[float] = None  # None = 1/(dim * overall feature variance)
    tol: float = 1e-4
    max_iter: int = 200_000

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise ValueError("nu must lie in (0, 1]")
        if self.kernel not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")


def _resolve_gamma(X: np.ndarray, hyper: OcsvmHyper) -> float:
    if hyper.kernel == "linear":
        return 0.0
    if hyper.gamma is not None:
        return hyper.gamma
    var = float(X.var())
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def _kernel(A: np.ndarray, B: np.ndarray, kind: str, gamma: float) -> np.ndarray:
    if kind == "linear":
        return A @ B.T
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


class _RowCache:
    """Bounded cache of kernel rows keyed by training index."""

    def __init__(self, X: np.ndarray, kind: str, gamma: float, capacity: int = 4096):
        self.X = X
        self.kind = kind
        self.gamma = gamma
        self.capacity = capacity
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        r = _kernel(self.X[i : i + 1], self.X, self.kind, self.gamma)[0]
        self._rows[i] = r
        if len(self._rows) > self.capacity:
            self._rows.popitem(last=False)
        return r


@dataclasses.dataclass
class OcsvmState:
    X_sv: np.ndarray
    alpha_sv: np.ndarray
    rho: float
    kernel: str
    gamma: float
    alpha_full: np.ndarray  # dual coefficients over the full training set
    n_iter: int
    converged: bool

    def decision(self, X: np.ndarray) -> np.ndarray:
        K = _kernel(np.atleast_2d(X), self.X_sv, self.kernel, self.gamma)
        return K @ self.alpha_sv - self.rho

    def score(self, X: np.ndarray) -> np.ndarray:
        return self.decision(X)


def fit_ocsvm(X: np.ndarray, hyper: OcsvmHyper) -> OcsvmState:
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    gamma = _resolve_gamma(X, hyper)
    C = 1.0 / (hyper.nu * n)
    cache = _RowCache(X, hyper.kernel, gamma)

    # libsvm-style start: the first floor(nu*n) points carry C, the remainder
    # of the unit mass goes to the next point.
    alpha = np.zeros(n)
    n_full = int(hyper.nu * n)
    alpha[:n_full] = C
    if n_full < n:
        alpha[n_full] = hyper.nu * n - n_full
        alpha[n_full] *= C

    grad = np.zeros(n)
    for i in np.flatnonzero(alpha > 0):
        grad += alpha[i] * cache.row(i)

    n_iter = 0
    converged = False
    while n_iter < hyper.max_iter:
        up = np.flatnonzero(alpha < C)
        low = np.flatnonzero(alpha > 0)
        if len(up) == 0 or len(low) == 0:
            converged = True  # box fully saturated (nu = 1)
            break
        # Maximal violating pair on the negative gradient.
        i = up[np.argmin(grad[up])]
        j = low[np.argmax(grad[low])]
        if grad[j] - grad[i] < hyper.tol:
            converged = True
            break

        Qi, Qj = cache.row(i), cache.row(j)
        quad = Qi[i] + Qj[j] - 2.0 * Qi[j]
        quad = max(quad, 1e-12)
        pair_sum = alpha[i] + alpha[j]
        delta = (grad[j] - grad[i]) / quad
        new_j = np.clip(alpha[j] - delta, max(0.0, pair_sum - C), min(C, pair_sum))
        new_i = pair_sum - new_j
        d_i, d_j = new_i - alpha[i], new_j - alpha[j]
        alpha[i], alpha[j] = new_i, new_j
        grad += Qi * d_i + Qj * d_j
        n_iter += 1

    sv = alpha > 1e-12
    free = (alpha > 1e-12) & (alpha < C * (1 - 1e-12))
    if free.any():
        rho = float(np.mean(grad[free]))
    else:
        upper = grad[alpha >= C * (1 - 1e-12)]
        lower = grad[alpha <= 1e-12]
        hi = upper.max() if len(upper) else grad.min()
        lo = lower.min() if len(lower) else grad.max()
        rho = float((hi + lo) / 2.0)

    return OcsvmState(
        X_sv=X[sv],
        alpha_sv=alpha[sv],
        rho=rho,
        kernel=hyper.kernel,
        gamma=gamma,
        alpha_full=alpha,
        n_iter=n_iter,
        converged=converged,
    )
