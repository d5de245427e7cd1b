"""Independent reference implementations used as test oracles.

Everything here is written the slow, obvious way (plain loops, textbook
formulas) and must stay independent of the code paths it checks.
"""

import math

import numpy as np


def brute_lof(X, k):
    """Classic in-sample LOF by plain loops, self excluded, ties included."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    D = [[math.dist(X[i], X[j]) for j in range(n)] for i in range(n)]
    kdist = []
    neigh = []
    for i in range(n):
        others = sorted(D[i][j] for j in range(n) if j != i)
        kd = others[k - 1]
        kdist.append(kd)
        neigh.append([j for j in range(n) if j != i and D[i][j] <= kd])
    lrd = []
    for i in range(n):
        reach = [max(kdist[j], D[i][j]) for j in neigh[i]]
        lrd.append(1.0 / (sum(reach) / len(reach)))
    lof = []
    for i in range(n):
        lof.append((sum(lrd[j] for j in neigh[i]) / len(neigh[i])) / lrd[i])
    return np.array(lof)


def brute_query_lof(X_train, Q, k):
    """LOF of external query points against a training set, plain loops."""
    X = np.asarray(X_train, dtype=float)
    n = len(X)
    D = [[math.dist(X[i], X[j]) for j in range(n)] for i in range(n)]
    kdist = []
    neigh = []
    for i in range(n):
        others = sorted(D[i][j] for j in range(n) if j != i)
        kd = others[k - 1]
        kdist.append(kd)
        neigh.append([j for j in range(n) if j != i and D[i][j] <= kd])
    lrd = []
    for i in range(n):
        reach = [max(kdist[j], D[i][j]) for j in neigh[i]]
        lrd.append(1.0 / (sum(reach) / len(reach)))

    out = []
    for q in np.atleast_2d(Q):
        dq = [math.dist(q, X[j]) for j in range(n)]
        kd = sorted(dq)[k - 1]
        nbrs = [j for j in range(n) if dq[j] <= kd]
        reach = [max(kdist[j], dq[j]) for j in nbrs]
        lrd_q = 1.0 / (sum(reach) / len(reach))
        out.append((sum(lrd[j] for j in nbrs) / len(nbrs)) / lrd_q)
    return np.array(out)


def harmonic_ref(m):
    """H(m) by direct summation, independent of any vectorized version."""
    total = 0.0
    for i in range(1, m + 1):
        total += 1.0 / i
    return total


def quantile_ref(values, pct):
    """Linear-interpolation percentile computed by hand from the definition."""
    s = sorted(values)
    if len(s) == 1:
        return s[0]
    pos = (pct / 100.0) * (len(s) - 1)
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    frac = pos - lo
    return s[lo] + frac * (s[hi] - s[lo])


def nearest_centroid_accuracy(X_train, y_train, X_test, y_test):
    """Nearest-centroid classifier as a separability oracle."""
    labels = sorted(set(y_train.tolist()))
    centroids = {c: X_train[y_train == c].mean(axis=0) for c in labels}
    hits = 0
    for x, t in zip(X_test, y_test):
        best = min(labels, key=lambda c: float(np.sum((x - centroids[c]) ** 2)))
        hits += int(best == t)
    return hits / len(y_test)


def softmax_xent_grad_hess(scores, y_onehot):
    """Per-sample gradient and hessian of multiclass cross-entropy w.r.t.
    the class scores, by the textbook formulas."""
    z = scores - scores.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    grad = p - y_onehot
    hess = p * (1.0 - p)
    return grad, hess


def finite_diff_grad(f, w, eps=1e-6):
    """Central finite differences of a scalar function."""
    g = np.zeros_like(w, dtype=float)
    for i in range(w.size):
        step = np.zeros_like(w, dtype=float)
        step.flat[i] = eps
        g.flat[i] = (f(w + step) - f(w - step)) / (2 * eps)
    return g
