"""Gaussian mixture density model fitted by EM.

Initialization is k-means++ followed by one hard-assignment M-step; EM then
iterates soft E/M steps until the mean per-sample log-likelihood gain drops
below tol.  Scores are mixture log-densities, so higher means more normal.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np
from scipy.special import logsumexp


@dataclasses.dataclass(frozen=True)
class GmmHyper:
    nc: int = 2
    cov_type: str = "auto"  # full | diagonal | auto (auto: full iff n >= 10*dim*nc and dim <= 64)
    tol: float = 1e-4
    max_iter: int = 200
    reg: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.nc < 1:
            raise ValueError("nc must be >= 1")
        if self.cov_type not in ("full", "diagonal", "auto"):
            raise ValueError(f"unknown cov_type {self.cov_type!r}")
        if self.reg <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("reg, tol must be positive; max_iter >= 1")


@dataclasses.dataclass
class GmmState:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray  # (nc, d, d) full, (nc, d) diagonal
    cov_type: str
    ll_history: list[float]  # mean per-sample log-likelihood per EM iteration
    n_iter: int
    converged: bool

    def score(self, X: np.ndarray) -> np.ndarray:
        return logsumexp(_component_logpdf(X, self) + np.log(self.weights), axis=1)

    def responsibilities(self, X: np.ndarray) -> np.ndarray:
        log_r = _component_logpdf(X, self) + np.log(self.weights)
        log_r -= logsumexp(log_r, axis=1, keepdims=True)
        return np.exp(log_r)


def _component_logpdf(X: np.ndarray, state: GmmState) -> np.ndarray:
    X = np.atleast_2d(X)
    n, d = X.shape
    nc = len(state.weights)
    out = np.empty((n, nc))
    if state.cov_type == "diagonal":
        for k in range(nc):
            var = state.covariances[k]
            diff = X - state.means[k]
            out[:, k] = -0.5 * (
                d * np.log(2 * np.pi) + np.sum(np.log(var)) + np.sum(diff**2 / var, axis=1)
            )
    else:
        for k in range(nc):
            L = _chol(state.covariances[k])
            diff = (X - state.means[k]).T
            sol = np.linalg.solve(L, diff)
            out[:, k] = (
                -0.5 * d * np.log(2 * np.pi)
                - np.sum(np.log(np.diag(L)))
                - 0.5 * np.sum(sol**2, axis=0)
            )
    return out


def _chol(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise RuntimeError("singular covariance despite regularizer") from None


def _kmeanspp_centers(X: np.ndarray, nc: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    for _ in range(1, nc):
        d2 = np.min(
            [np.sum((X - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(n)])
            continue
        centers.append(X[rng.choice(n, p=d2 / total)])
    return np.array(centers)


def _resolve_cov_type(hyper: GmmHyper, n: int, d: int) -> str:
    if hyper.cov_type != "auto":
        return hyper.cov_type
    # Small calibration sets in high dimension make full covariances singular.
    return "full" if d <= 64 and n >= 10 * d * hyper.nc else "diagonal"


def _mstep(X, resp, reg, cov_type):
    n, d = X.shape
    nk = resp.sum(axis=0)
    nk = np.maximum(nk, 10 * np.finfo(float).tiny)
    weights = nk / n
    means = (resp.T @ X) / nk[:, None]
    if cov_type == "diagonal":
        covs = np.empty((len(nk), d))
        for k in range(len(nk)):
            diff = X - means[k]
            covs[k] = (resp[:, k] @ diff**2) / nk[k] + reg
    else:
        covs = np.empty((len(nk), d, d))
        for k in range(len(nk)):
            diff = X - means[k]
            covs[k] = (resp[:, k, None] * diff).T @ diff / nk[k] + reg * np.eye(d)
    # Renormalize so weights sum to one exactly up to float rounding.
    weights = weights / weights.sum()
    return weights, means, covs


def fit_gmm(X: np.ndarray, hyper: GmmHyper) -> GmmState:
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if hyper.nc > n:
        raise ValueError(f"nc={hyper.nc} exceeds sample count {n}")
    rng = np.random.default_rng(hyper.seed)
    cov_type = _resolve_cov_type(hyper, n, d)

    centers = _kmeanspp_centers(X, hyper.nc, rng)
    assign = np.argmin(
        np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2), axis=1
    )
    hard = np.zeros((n, hyper.nc))
    hard[np.arange(n), assign] = 1.0
    # Empty clusters would zero a weight; fall back to a uniform sliver.
    empty = hard.sum(axis=0) == 0
    if empty.any():
        hard[:, empty] = 1.0 / n
    weights, means, covs = _mstep(X, hard, hyper.reg, cov_type)

    state = GmmState(
        weights=weights,
        means=means,
        covariances=covs,
        cov_type=cov_type,
        ll_history=[],
        n_iter=0,
        converged=False,
    )

    prev_ll: Optional[float] = None
    for it in range(hyper.max_iter):
        log_joint = _component_logpdf(X, state) + np.log(state.weights)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(np.mean(log_norm))
        state.ll_history.append(ll)
        state.n_iter = it + 1
        if prev_ll is not None and abs(ll - prev_ll) < hyper.tol:
            state.converged = True
            break
        prev_ll = ll
        resp = np.exp(log_joint - log_norm[:, None])
        state.weights, state.means, state.covariances = _mstep(
            X, resp, hyper.reg, cov_type
        )
    return state
