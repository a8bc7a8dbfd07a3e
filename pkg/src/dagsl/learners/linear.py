"""Linear-family learners: least squares, softmax regression, polynomial ridge,
Bayesian ridge and Gaussian naive Bayes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tabular import Standardizer


def ridge_lstsq(A: np.ndarray, y: np.ndarray, ridge: float):
    """Centred least squares with a ``ridge`` penalty on the mean-squared-error scale.

    Solves ``min (1/n)||y - b - A beta||^2 + ridge ||beta||^2`` and returns
    ``(beta, b)``.  The intercept is never penalised.
    """
    n, q = A.shape
    xm = A.mean(axis=0)
    ym = y.mean(axis=0)
    Ac = A - xm
    G = Ac.T @ Ac / n
    G[np.diag_indices(q)] += ridge
    beta = np.linalg.solve(G, Ac.T @ (y - ym) / n) if q else np.zeros((0,) + y.shape[1:])
    return beta, ym - xm @ beta


def _softmax(eta: np.ndarray) -> np.ndarray:
    eta = eta - eta.max(axis=1, keepdims=True)
    e = np.exp(eta)
    return e / e.sum(axis=1, keepdims=True)


def _softmax_nll(Ai, B, Y, ridge):
    eta = np.hstack([np.zeros((Ai.shape[0], 1)), Ai @ B])
    mx = eta.max(axis=1, keepdims=True)
    lse = (mx + np.log(np.exp(eta - mx).sum(axis=1, keepdims=True))).ravel()
    nll = np.mean(lse - (eta * Y).sum(axis=1))
    return nll + 0.5 * ridge * np.sum(B[1:] ** 2)


def fit_softmax(A, y, n_classes, ridge=1e-8, max_iter=100, tol=1e-8):
    """Multinomial logistic regression by damped Newton steps.

    Class 0 is the reference, so the binary case is ordinary logistic
    regression.  Returns coefficients of shape ``(q + 1, n_classes - 1)``
    whose first row holds intercepts.
    """
    n, q = A.shape
    C = n_classes
    Y = np.zeros((n, C))
    Y[np.arange(n), y] = 1.0
    Ai = np.hstack([np.ones((n, 1)), A])
    B = np.zeros((q + 1, C - 1))
    pen = np.full(q + 1, ridge)
    pen[0] = 0.0
    obj = _softmax_nll(Ai, B, Y, ridge)
    for _ in range(max_iter):
        P = _softmax(np.hstack([np.zeros((n, 1)), Ai @ B]))
        grad = Ai.T @ (P[:, 1:] - Y[:, 1:]) / n + pen[:, None] * B
        H = np.empty(((C - 1) * (q + 1), (C - 1) * (q + 1)))
        for a in range(C - 1):
            for b in range(a, C - 1):
                w = P[:, a + 1] * ((a == b) - P[:, b + 1])
                blk = (Ai * w[:, None]).T @ Ai / n
                if a == b:
                    blk[np.diag_indices(q + 1)] += pen + 1e-12
                H[a * (q + 1):(a + 1) * (q + 1), b * (q + 1):(b + 1) * (q + 1)] = blk
                H[b * (q + 1):(b + 1) * (q + 1), a * (q + 1):(a + 1) * (q + 1)] = blk.T
        g = grad.T.reshape(-1)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        step = step.reshape(C - 1, q + 1).T
        slope = float(g @ step.T.reshape(-1))
        t = 1.0
        for _ in range(40):
            cand = B - t * step
            new = _softmax_nll(Ai, cand, Y, ridge)
            if new <= obj - 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        B = cand
        done = obj - new <= tol * (1.0 + abs(obj))
        obj = new
        if done:
            break
    return B


def softmax_proba(A, B):
    eta = B[0] + A @ B[1:]
    return _softmax(np.hstack([np.zeros((A.shape[0], 1)), eta]))


@dataclass(frozen=True)
class LinearModel:
    coef: np.ndarray
    intercept: float

    def predict(self, X):
        return X @ self.coef + self.intercept


@dataclass(frozen=True)
class SoftmaxModel:
    coef: np.ndarray

    def predict(self, X):
        return softmax_proba(X, self.coef)


def fit_lr(X, y, task, seed, continuous, ridge=1e-8, max_iter=100, tol=1e-8):
    if task.is_classification:
        return SoftmaxModel(fit_softmax(X, y, task.n_classes, ridge, int(max_iter), tol))
    beta, b = ridge_lstsq(X, y, ridge)
    return LinearModel(beta, float(b))


# ------------------------------------------------------------------ polynomial

def poly_expand(Xs: np.ndarray, continuous: np.ndarray, degree: int = 3) -> np.ndarray:
    """Powers 2..degree of continuous columns plus all pairwise products."""
    cols = [Xs]
    cont = Xs[:, continuous]
    for d in range(2, degree + 1):
        cols.append(cont ** d)
    p = Xs.shape[1]
    iu, ju = np.triu_indices(p, k=1)
    if iu.size:
        cols.append(Xs[:, iu] * Xs[:, ju])
    return np.hstack(cols)


@dataclass(frozen=True)
class PolyModel:
    inner: Standardizer
    continuous: np.ndarray
    outer: Standardizer
    degree: int
    model: object

    def features(self, X):
        phi = poly_expand(self.inner.transform(X), self.continuous, self.degree)
        return self.outer.transform(phi)

    def predict(self, X):
        return self.model.predict(self.features(X))


def fit_poly(X, y, task, seed, continuous, degree=3, ridge=1e-3):
    inner = Standardizer.fit(X, continuous)
    phi = poly_expand(inner.transform(X), continuous, int(degree))
    outer = Standardizer.fit(phi)
    phi = outer.transform(phi)
    if task.is_classification:
        model = SoftmaxModel(fit_softmax(phi, y, task.n_classes, ridge))
    else:
        beta, b = ridge_lstsq(phi, y, ridge)
        model = LinearModel(beta, float(b))
    return PolyModel(inner, continuous, outer, int(degree), model)


# -------------------------------------------------------------- Bayesian ridge

@dataclass(frozen=True)
class ScaledLinearModel:
    scaler: Standardizer
    coef: np.ndarray
    intercept: float

    def predict(self, X):
        return self.scaler.transform(X) @ self.coef + self.intercept


def fit_bayes_ridge(X, y, task, seed, continuous, max_iter=300, tol=1e-3,
                    alpha_1=1e-6, alpha_2=1e-6, lambda_1=1e-6, lambda_2=1e-6):
    """Evidence-maximising ridge regression (noise precision alpha, weight precision lambda)."""
    scaler = Standardizer.fit(X, continuous)
    Xs = scaler.transform(X)
    n, p = Xs.shape
    xm = Xs.mean(axis=0)
    ym = y.mean()
    Xc = Xs - xm
    yc = y - ym
    U, S, Vt = np.linalg.svd(Xc, full_matrices=False)
    eig = S ** 2
    Uty = U.T @ yc
    alpha = 1.0 / (np.var(y) + np.finfo(float).eps)
    lam = 1.0
    coef = np.zeros(p)
    for _ in range(int(max_iter)):
        new = Vt.T @ (S / (eig + lam / alpha) * Uty)
        gamma = np.sum(alpha * eig / (lam + alpha * eig))
        lam = (gamma + 2 * lambda_1) / (np.sum(new ** 2) + 2 * lambda_2)
        sse = np.sum((yc - Xc @ new) ** 2)
        alpha = (n - gamma + 2 * alpha_1) / (sse + 2 * alpha_2)
        converged = np.sum(np.abs(new - coef)) < tol
        coef = new
        if converged:
            break
    coef = Vt.T @ (S / (eig + lam / alpha) * Uty)
    return ScaledLinearModel(scaler, coef, float(ym - xm @ coef))


@dataclass(frozen=True)
class GaussianNBModel:
    log_prior: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def predict(self, X):
        jll = self.log_prior - 0.5 * np.sum(np.log(2 * np.pi * self.variances), axis=1)
        diff = X[:, None, :] - self.means[None]
        jll = jll[None, :] - 0.5 * np.sum(diff ** 2 / self.variances[None], axis=2)
        return _softmax(jll)


def fit_naive_bayes(X, y, task, seed, continuous, var_floor=1e-9):
    C = task.n_classes
    p = X.shape[1]
    eps = var_floor * max(float(np.var(X, axis=0).max(initial=0.0)), 1.0)
    means = np.zeros((C, p))
    variances = np.ones((C, p))
    counts = np.bincount(y, minlength=C).astype(float)
    for c in range(C):
        rows = X[y == c]
        if rows.shape[0]:
            means[c] = rows.mean(axis=0)
            variances[c] = rows.var(axis=0)
    variances = variances + eps
    with np.errstate(divide="ignore"):
        log_prior = np.log(counts / counts.sum())
    return GaussianNBModel(log_prior, means, variances)


def fit_bayes(X, y, task, seed, continuous, **params):
    """Bayesian ridge for regression, Gaussian naive Bayes for classification."""
    if task.is_classification:
        floor = params.get("var_floor", 1e-9)
        return fit_naive_bayes(X, y, task, seed, continuous, var_floor=floor)
    params.pop("var_floor", None)
    return fit_bayes_ridge(X, y, task, seed, continuous, **params)
