"""Elastic-net regression (coordinate descent) and classification (FISTA on
the softmax loss), with the penalty picked by internal cross-validation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..tabular import Standardizer
from .linear import _softmax


@njit(cache=True)
def _cd_enet(G, c, alpha, l1_ratio, beta, max_iter, tol):
    # minimises 0.5 b'Gb - c'b + alpha*(l1*|b|_1 + 0.5*(1-l1)*|b|^2)
    p = c.shape[0]
    thresh = alpha * l1_ratio
    shrink = alpha * (1.0 - l1_ratio)
    for _ in range(max_iter):
        max_delta = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                beta[j] = 0.0
                continue
            r = c[j]
            for k in range(p):
                if k != j:
                    r -= G[j, k] * beta[k]
            if r > thresh:
                new = (r - thresh) / (gjj + shrink)
            elif r < -thresh:
                new = (r + thresh) / (gjj + shrink)
            else:
                new = 0.0
            d = abs(new - beta[j])
            if d > max_delta:
                max_delta = d
            beta[j] = new
        if max_delta < tol:
            break
    return beta


@njit(cache=True)
def _fista_softmax(A, Y, alpha, l1_ratio, W0, step, max_iter, tol):
    # W rows: 0 = intercepts (unpenalised), 1.. = slopes; columns = classes
    n, q = A.shape
    C = Y.shape[1]
    W = W0.copy()
    V = W0.copy()
    t = 1.0
    thr = step * alpha * l1_ratio
    for _ in range(max_iter):
        eta = A @ V[1:] + V[0]
        for i in range(n):
            m = eta[i].max()
            s = 0.0
            for k in range(C):
                eta[i, k] = np.exp(eta[i, k] - m)
                s += eta[i, k]
            for k in range(C):
                eta[i, k] = (eta[i, k] / s - Y[i, k]) / n
        g0 = eta.sum(axis=0)
        g = A.T @ eta + alpha * (1.0 - l1_ratio) * V[1:]
        Wn = np.empty_like(W)
        Wn[0] = V[0] - step * g0
        z = V[1:] - step * g
        for a in range(q):
            for k in range(C):
                v = z[a, k]
                if v > thr:
                    Wn[a + 1, k] = v - thr
                elif v < -thr:
                    Wn[a + 1, k] = v + thr
                else:
                    Wn[a + 1, k] = 0.0
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        delta = np.abs(Wn - W).max()
        V = Wn + ((t - 1.0) / tn) * (Wn - W)
        W = Wn
        t = tn
        if delta < tol:
            break
    return W


def _folds(n, k, rng):
    fold = np.empty(n, dtype=np.int64)
    fold[rng.permutation(n)] = np.arange(n) % k
    return fold


def _enet_regression_path(Xs, y, alphas, l1_ratio, max_iter, tol):
    n = Xs.shape[0]
    xm = Xs.mean(axis=0)
    ym = y.mean()
    Xc = Xs - xm
    G = Xc.T @ Xc / n
    c = Xc.T @ (y - ym) / n
    beta = np.zeros(Xs.shape[1])
    out = []
    for a in alphas:
        beta = _cd_enet(G, c, float(a), l1_ratio, beta.copy(), max_iter, tol)
        out.append((beta.copy(), ym - xm @ beta))
    return out


def _alpha_grid_regression(Xs, y, l1_ratio, n_alphas, eps):
    n = Xs.shape[0]
    c = (Xs - Xs.mean(axis=0)).T @ (y - y.mean()) / n
    amax = np.abs(c).max(initial=0.0) / max(l1_ratio, 1e-3)
    if amax <= 0:
        amax = 1.0
    return np.geomspace(amax, amax * eps, n_alphas)


def _softmax_fit_path(As, Y, alphas, l1_ratio, max_iter, tol):
    n, q = As.shape
    Ai = np.hstack([np.ones((n, 1)), As])
    lmax = np.linalg.eigvalsh(Ai.T @ Ai / n).max()
    W = np.zeros((q + 1, Y.shape[1]))
    out = []
    for a in alphas:
        step = 1.0 / (0.5 * lmax + a * (1.0 - l1_ratio))
        W = _fista_softmax(As, Y, float(a), l1_ratio, W, step, max_iter, tol)
        out.append(W.copy())
    return out


def _alpha_grid_softmax(As, Y, l1_ratio, n_alphas, eps):
    n = As.shape[0]
    g = (As - As.mean(axis=0)).T @ (Y - Y.mean(axis=0)) / n
    amax = np.abs(g).max(initial=0.0) / max(l1_ratio, 1e-3)
    if amax <= 0:
        amax = 1.0
    return np.geomspace(amax, amax * eps, n_alphas)


@dataclass(frozen=True)
class ElasticRegressor:
    scaler: Standardizer
    coef: np.ndarray
    intercept: float
    alpha: float

    def predict(self, X):
        return self.scaler.transform(X) @ self.coef + self.intercept


@dataclass(frozen=True)
class ElasticClassifier:
    scaler: Standardizer
    W: np.ndarray
    alpha: float

    def predict(self, X):
        As = self.scaler.transform(X)
        return _softmax(As @ self.W[1:] + self.W[0])


def fit_elastic(X, y, task, seed, continuous, alpha=None, l1_ratio=0.5, n_alphas=5,
                eps=1e-3, cv=3, max_iter=10000, tol=1e-10):
    """Elastic net with mixing ``l1_ratio``.

    When ``alpha`` is None it is chosen from a log grid of ``n_alphas`` values
    (from the smallest penalty that zeroes every coefficient down to ``eps``
    times that) by ``cv``-fold cross-validation.
    """
    rng = np.random.default_rng(seed)
    scaler = Standardizer.fit(X, continuous)
    Xs = scaler.transform(X)
    n = Xs.shape[0]
    l1_ratio = float(l1_ratio)
    max_iter = int(max_iter)
    if task.is_classification:
        Y = np.zeros((n, task.n_classes))
        Y[np.arange(n), y] = 1.0
        ftol = max(tol, 1e-7)
        fiters = min(max_iter, 5000)
        if alpha is None:
            alphas = _alpha_grid_softmax(Xs, Y, l1_ratio, int(n_alphas), eps)
            alpha = _cv_pick(
                n, int(cv), rng, alphas,
                lambda tr: _softmax_fit_path(Xs[tr], Y[tr], alphas, l1_ratio, fiters, ftol),
                lambda W, va: -np.mean(
                    np.log(np.clip((_softmax(Xs[va] @ W[1:] + W[0]) * Y[va]).sum(1), 1e-15, None))
                ),
            )
        W = _softmax_fit_path(Xs, Y, [alpha], l1_ratio, fiters, ftol)[0]
        return ElasticClassifier(scaler, W, float(alpha))
    if alpha is None:
        alphas = _alpha_grid_regression(Xs, y, l1_ratio, int(n_alphas), eps)
        alpha = _cv_pick(
            n, int(cv), rng, alphas,
            lambda tr: _enet_regression_path(Xs[tr], y[tr], alphas, l1_ratio, max_iter, tol),
            lambda fit, va: np.mean((y[va] - Xs[va] @ fit[0] - fit[1]) ** 2),
        )
        path = _enet_regression_path(Xs, y, [a for a in alphas if a >= alpha], l1_ratio,
                                     max_iter, tol)
        beta, b = path[-1]
    else:
        beta, b = _enet_regression_path(Xs, y, [float(alpha)], l1_ratio, max_iter, tol)[0]
    return ElasticRegressor(scaler, beta, float(b), float(alpha))


def _cv_pick(n, k, rng, alphas, fit_path, loss):
    k = max(2, min(k, n))
    fold = _folds(n, k, rng)
    risk = np.zeros(len(alphas))
    for f in range(k):
        tr = np.flatnonzero(fold != f)
        va = np.flatnonzero(fold == f)
        for i, fit in enumerate(fit_path(tr)):
            risk[i] += loss(fit, va) * va.size
    return float(alphas[int(np.argmin(risk))])
