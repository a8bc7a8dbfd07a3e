"""Single-hidden-layer ReLU network trained with minibatch Adam."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..tabular import Standardizer


@njit(cache=True, fastmath=True)
def _loss_grad_rows(W1, b1, W2, b2, X, Y, rows, classification, l2, gW1, gb1, gW2, gb2):
    m = rows.shape[0]
    p = X.shape[1]
    H = W1.shape[1]
    d = W2.shape[1]
    W2t = np.ascontiguousarray(W2.T)
    gW2t = np.zeros((d, H))
    Z = np.empty(H)
    A = np.empty(H)
    O = np.empty(d)
    dZ = np.empty(H)
    gW1[:, :] = 0.0
    gb1[:] = 0.0
    gb2[:] = 0.0
    loss = 0.0
    for r in range(m):
        i = rows[r]
        for h in range(H):
            Z[h] = b1[h]
        for j in range(p):
            xij = X[i, j]
            for h in range(H):
                Z[h] += xij * W1[j, h]
        for h in range(H):
            A[h] = Z[h] if Z[h] > 0.0 else 0.0
        for k in range(d):
            o = b2[k]
            for h in range(H):
                o += A[h] * W2t[k, h]
            O[k] = o
        if classification:
            mx = O[0]
            for k in range(1, d):
                if O[k] > mx:
                    mx = O[k]
            s = 0.0
            for k in range(d):
                O[k] = np.exp(O[k] - mx)
                s += O[k]
            for k in range(d):
                pk = O[k] / s
                if Y[i, k] > 0.0:
                    loss -= Y[i, k] * np.log(max(pk, 1e-300))
                O[k] = (pk - Y[i, k]) / m
        else:
            for k in range(d):
                diff = O[k] - Y[i, k]
                loss += 0.5 * diff * diff
                O[k] = diff / m
        for h in range(H):
            dZ[h] = 0.0
        for k in range(d):
            ok = O[k]
            gb2[k] += ok
            for h in range(H):
                gW2t[k, h] += A[h] * ok
                dZ[h] += ok * W2t[k, h]
        for h in range(H):
            if Z[h] <= 0.0:
                dZ[h] = 0.0
            gb1[h] += dZ[h]
        for j in range(p):
            xij = X[i, j]
            for h in range(H):
                gW1[j, h] += xij * dZ[h]
    loss /= m
    sq = 0.0
    c = l2 / m
    for j in range(p):
        for h in range(H):
            sq += W1[j, h] * W1[j, h]
            gW1[j, h] += c * W1[j, h]
    for h in range(H):
        for k in range(d):
            sq += W2[h, k] * W2[h, k]
            gW2[h, k] = gW2t[k, h] + c * W2[h, k]
    return loss + 0.5 * l2 * sq / m


@njit(cache=True)
def _loss_grad(W1, b1, W2, b2, X, Y, classification, l2, gW1, gb1, gW2, gb2):
    rows = np.arange(X.shape[0])
    return _loss_grad_rows(W1, b1, W2, b2, X, Y, rows, classification, l2, gW1, gb1, gW2, gb2)


@njit(cache=True, fastmath=True)
def _adam(p, g, m1, m2, t, lr, beta1, beta2, eps):
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    flat_p = p.reshape(-1)
    flat_g = g.reshape(-1)
    f1 = m1.reshape(-1)
    f2 = m2.reshape(-1)
    for i in range(flat_p.shape[0]):
        f1[i] = beta1 * f1[i] + (1.0 - beta1) * flat_g[i]
        f2[i] = beta2 * f2[i] + (1.0 - beta2) * flat_g[i] * flat_g[i]
        flat_p[i] -= lr * (f1[i] / c1) / (np.sqrt(f2[i] / c2) + eps)


@njit(cache=True)
def _train(X, Y, classification, hidden, epochs, batch, lr, l2, seed):
    np.random.seed(seed)
    n, p = X.shape
    d = Y.shape[1]
    lim1 = np.sqrt(6.0 / (p + hidden))
    lim2 = np.sqrt(6.0 / (hidden + d))
    W1 = (np.random.random((p, hidden)) * 2.0 - 1.0) * lim1
    b1 = (np.random.random(hidden) * 2.0 - 1.0) * lim1
    W2 = (np.random.random((hidden, d)) * 2.0 - 1.0) * lim2
    b2 = (np.random.random(d) * 2.0 - 1.0) * lim2
    gW1 = np.zeros_like(W1)
    gb1 = np.zeros_like(b1)
    gW2 = np.zeros_like(W2)
    gb2 = np.zeros_like(b2)
    mW1 = np.zeros_like(W1)
    vW1 = np.zeros_like(W1)
    mb1 = np.zeros_like(b1)
    vb1 = np.zeros_like(b1)
    mW2 = np.zeros_like(W2)
    vW2 = np.zeros_like(W2)
    mb2 = np.zeros_like(b2)
    vb2 = np.zeros_like(b2)
    t = 0
    for _ in range(epochs):
        perm = np.random.permutation(n)
        for start in range(0, n, batch):
            sel = perm[start:start + batch]
            _loss_grad_rows(W1, b1, W2, b2, X, Y, sel, classification, l2, gW1, gb1, gW2, gb2)
            t += 1
            _adam(W1, gW1, mW1, vW1, t, lr, 0.9, 0.999, 1e-8)
            _adam(b1, gb1, mb1, vb1, t, lr, 0.9, 0.999, 1e-8)
            _adam(W2, gW2, mW2, vW2, t, lr, 0.9, 0.999, 1e-8)
            _adam(b2, gb2, mb2, vb2, t, lr, 0.9, 0.999, 1e-8)
    return W1, b1, W2, b2


def unpack(theta, p, hidden, d):
    """Split a flat parameter vector into ``(W1, b1, W2, b2)``."""
    i = 0
    out = []
    for shape in ((p, hidden), (hidden,), (hidden, d), (d,)):
        size = int(np.prod(shape))
        out.append(np.ascontiguousarray(theta[i:i + size].reshape(shape)))
        i += size
    return out


def loss_and_grad(theta, X, Y, hidden, classification, l2=0.0):
    """Training loss and its gradient at flat parameters ``theta``."""
    X = np.ascontiguousarray(X, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    W1, b1, W2, b2 = unpack(np.asarray(theta, dtype=float), X.shape[1], hidden, Y.shape[1])
    grads = [np.zeros_like(a) for a in (W1, b1, W2, b2)]
    loss = _loss_grad(W1, b1, W2, b2, X, Y, bool(classification), float(l2), *grads)
    return loss, np.concatenate([g.ravel() for g in grads])


@dataclass(frozen=True)
class MLPModel:
    scaler: Standardizer
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    y_mean: float
    y_scale: float
    classification: bool

    def predict(self, X):
        Xs = self.scaler.transform(X)
        O = np.maximum(Xs @ self.W1 + self.b1, 0.0) @ self.W2 + self.b2
        if self.classification:
            O = O - O.max(axis=1, keepdims=True)
            e = np.exp(O)
            return e / e.sum(axis=1, keepdims=True)
        return O[:, 0] * self.y_scale + self.y_mean


def fit_mlp(X, y, task, seed, continuous, hidden=64, epochs=200, batch=32,
            learning_rate=1e-3, l2=1e-4):
    scaler = Standardizer.fit(X, continuous)
    Xs = np.ascontiguousarray(scaler.transform(X))
    n = Xs.shape[0]
    if task.is_classification:
        Y = np.zeros((n, task.n_classes))
        Y[np.arange(n), y] = 1.0
        y_mean, y_scale = 0.0, 1.0
    else:
        y_mean = float(y.mean())
        y_scale = float(y.std()) or 1.0
        Y = ((y - y_mean) / y_scale).reshape(-1, 1)
    seed = int(np.random.default_rng(seed).integers(2 ** 31 - 1))
    W1, b1, W2, b2 = _train(Xs, np.ascontiguousarray(Y), task.is_classification, int(hidden),
                            int(epochs), int(batch), float(learning_rate), float(l2), seed)
    return MLPModel(scaler, W1, b1, W2, b2, y_mean, y_scale, task.is_classification)
