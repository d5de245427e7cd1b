"""Multinomial logistic regression, L2-penalized, fitted by L-BFGS."""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import minimize


@dataclasses.dataclass(frozen=True)
class LogRegHyper:
    l2: float = 1e-4
    max_iter: int = 500
    tol: float = 1e-9

    def __post_init__(self):
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    P = np.exp(Z)
    return P / P.sum(axis=1, keepdims=True)


def loss_and_grad(theta: np.ndarray, X, Y, l2: float):
    """Mean cross-entropy + (l2/2)||W||^2; bias unpenalized.

    theta packs W (d x K) then b (K).  Returns (loss, grad) with grad packed
    the same way; exposed so tests can check it against finite differences.
    """
    n, d = X.shape
    K = Y.shape[1]
    W = theta[: d * K].reshape(d, K)
    b = theta[d * K :]
    P = _softmax(X @ W + b)
    eps = 1e-300
    loss = -np.mean(np.sum(Y * np.log(np.clip(P, eps, None)), axis=1))
    loss += 0.5 * l2 * np.sum(W * W)
    diff = (P - Y) / n
    gW = X.T @ diff + l2 * W
    gb = diff.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


@dataclasses.dataclass
class LogRegState:
    W: np.ndarray
    b: np.ndarray
    converged: bool

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return _softmax(X @ self.W + self.b)


def fit_logreg(X, y, n_classes: int, hyper: LogRegHyper, seed: int = 0) -> LogRegState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    theta0 = np.zeros(d * n_classes + n_classes)
    res = minimize(
        loss_and_grad,
        theta0,
        args=(X, Y, hyper.l2),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": hyper.max_iter, "ftol": hyper.tol, "gtol": 1e-10},
    )
    W = res.x[: d * n_classes].reshape(d, n_classes)
    b = res.x[d * n_classes :]
    return LogRegState(W=W, b=b, converged=bool(res.success))
