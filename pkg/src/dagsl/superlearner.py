"""Cross-validated stacking with simplex-constrained meta-weights.

A :class:`SuperLearner` trains every candidate on ``k - 1`` folds, collects
their held-out predictions into a level-one matrix ``Z``, chooses convex
weights minimising the squared error of ``Z @ w`` and finally refits each
candidate on all rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import learners as lrn
from .errors import NonFiniteError, ShapeMismatchError, TooFewRowsError
from .learners import LearnerSpec, Task, TrainedLearner

SIMPLEX_TOL = 1e-10
SIMPLEX_MAX_ITER = 50_000
SIMPLEX_RIDGE = 1e-9


@njit(cache=True)
def _eg_simplex(G, c, ridge, tol, max_iter):
    # exponentiated gradient on 0.5 w'Gw - c'w + 0.5 ridge |w|^2 with step adaptation
    K = c.shape[0]
    w = np.full(K, 1.0 / K)
    g = G @ w - c + ridge * w
    f = 0.5 * w @ (G @ w) - c @ w + 0.5 * ridge * (w @ w)
    scale = 0.0
    for i in range(K):
        scale = max(scale, G[i, i])
    step = 1.0 / max(scale, 1e-300)
    it = 0
    while it < max_iter:
        it += 1
        m = g.min()
        new = w * np.exp(-step * (g - m))
        new /= new.sum()
        fn = 0.5 * new @ (G @ new) - c @ new + 0.5 * ridge * (new @ new)
        if fn > f + 1e-15 * abs(f):
            step *= 0.5
            if step < 1e-300:
                break
            continue
        delta = np.abs(new - w).max()
        w = new
        f = fn
        g = G @ w - c + ridge * w
        step *= 1.2
        if delta < tol:
            break
    return w


def simplex_objective(Z, y, w) -> float:
    """Mean squared error of ``Z @ w`` against ``y``."""
    r = np.asarray(Z, float) @ np.asarray(w, float) - np.asarray(y, float)
    return float(np.mean(r ** 2))


def solve_simplex_weights(Z, y, ridge: float = SIMPLEX_RIDGE, tol: float = SIMPLEX_TOL,
                          max_iter: int = SIMPLEX_MAX_ITER) -> np.ndarray:
    """Convex combination weights minimising the mean squared error of ``Z @ w``.

    Parameters
    ----------
    Z : ndarray, shape (m, K)
        Candidate predictions, one column per candidate.
    y : ndarray, shape (m,)
        Target values.

    Returns
    -------
    ndarray, shape (K,)
        Non-negative weights summing to one.  Columns that are exact
        duplicates receive equal weight.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if Z.ndim == 1:
        Z = Z.reshape(-1, 1)
    if Z.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"Z has {Z.shape[0]} rows but y has {y.shape[0]}")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(y))):
        raise NonFiniteError("level-one matrix or target contains non-finite values")
    K = Z.shape[1]
    if K == 1:
        return np.ones(1)
    m = max(Z.shape[0], 1)
    # scale so the solver's step sizes do not depend on the units of y
    s = float(np.sqrt(np.mean(y ** 2) + np.mean(Z ** 2))) or 1.0
    Zs = Z / s
    G = 2.0 * (Zs.T @ Zs) / m
    c = 2.0 * (Zs.T @ (y / s)) / m
    w = _eg_simplex(G, c, 2.0 * ridge, tol, int(max_iter))
    # exponentiated updates leave underflowed dust on discarded columns
    w = np.where(w < 1e-15, 0.0, w)
    return w / w.sum()


def make_folds(y, k: int, rng: np.random.Generator, stratify: bool):
    """Seeded fold labels; returns ``(fold, stratified)``.

    Classification targets are stratified when every observed class has at
    least ``k`` rows; otherwise a plain shuffle is used and ``stratified`` is
    False.
    """
    n = y.shape[0]
    fold = np.empty(n, dtype=np.int64)
    if stratify:
        classes, counts = np.unique(y, return_counts=True)
        if counts.min() >= k:
            offset = 0
            for c in classes:
                idx = rng.permutation(np.flatnonzero(y == c))
                fold[idx] = (offset + np.arange(idx.size)) % k
                offset += idx.size
            return fold, True
    fold[rng.permutation(n)] = np.arange(n) % k
    return fold, False


def _child_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *path]).generate_state(1)[0])


def _one_hot(codes, n_classes):
    out = np.zeros((codes.shape[0], n_classes))
    out[np.arange(codes.shape[0]), codes] = 1.0
    return out


def _risk(pred, target):
    # squared error per row (summed over classes), averaged over rows
    d = pred - target
    return float(np.mean(d ** 2) if d.ndim == 1 else np.mean(np.sum(d ** 2, axis=1)))


@dataclass(frozen=True)
class SuperLearner:
    """A fitted stacked ensemble for one outcome.

    Attributes
    ----------
    level_one : ndarray
        Held-out candidate predictions, shape ``(n, K)`` for regression and
        ``(n, C, K)`` for classification.
    cv_risks : dict
        Cross-validated risk per candidate name plus ``"ensemble"``.
    stratified : bool
        False when classification folds could not be stratified.
    """

    task: Task
    specs: tuple
    models: tuple
    weights: np.ndarray
    k: int
    cv_risks: dict
    level_one: np.ndarray = field(repr=False)
    folds: np.ndarray = field(repr=False)
    stratified: bool = True

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    @property
    def oof_prediction(self) -> np.ndarray:
        """Cross-validated ensemble prediction for each training row."""
        return _mix(self.level_one, self.weights, self.task.is_classification)

    def named_weights(self) -> dict:
        return {s.name: float(w) for s, w in zip(self.specs, self.weights)}


def _mix(Z, w, classification):
    out = Z @ w
    if classification:
        out = np.clip(out, 0.0, None)
        out = out / out.sum(axis=1, keepdims=True)
    return out


def fit_super_learner(X, y, task: Task, k: int = 6, specs=None, seed: int = 0,
                      continuous=None) -> SuperLearner:
    """Fit a Super Learner of the candidates in ``specs`` (default: all seven).

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Encoded predictors.
    y : ndarray, shape (n,)
        Outcome; integer class codes for classification tasks.
    task : Task
    k : int
        Number of cross-validation folds.
    specs : list of LearnerSpec or tokens, optional
    seed : int
    continuous : ndarray of bool, optional
        Which columns of ``X`` each learner should standardise.
    """
    specs = tuple(lrn.parse_learners(specs))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    if X.shape[0] != n:
        raise ShapeMismatchError(f"X has {X.shape[0]} rows but y has {n}")
    k = int(k)
    if k < 2:
        raise TooFewRowsError(f"fold count must be at least 2, got {k}")
    if n < k:
        raise TooFewRowsError(f"{n} rows cannot be split into {k} folds")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("training data contain NaN or infinite values")

    rng = np.random.default_rng(_child_seed(seed, 0))
    fold, stratified = make_folds(y, k, rng, task.is_classification)
    if not task.is_classification:
        stratified = True

    K = len(specs)
    if task.is_classification:
        C = task.n_classes
        target = _one_hot(y.astype(np.int64), C)
        Z = np.empty((n, C, K))
    else:
        target = y
        Z = np.empty((n, K))

    for j, spec in enumerate(specs):
        for f in range(k):
            tr = fold != f
            va = ~tr
            model = lrn.fit(spec, X[tr], y[tr], task, _child_seed(seed, 1, j, f), continuous)
            Z[va, ..., j] = lrn.predict(model, X[va])

    if task.is_classification:
        weights = solve_simplex_weights(Z.reshape(n * C, K), target.reshape(-1))
    else:
        weights = solve_simplex_weights(Z, target)

    risks = {s.name: _risk(Z[..., j], target) for j, s in enumerate(specs)}
    risks["ensemble"] = _risk(Z @ weights, target)

    models = tuple(
        lrn.fit(spec, X, y, task, _child_seed(seed, 2, j), continuous)
        for j, spec in enumerate(specs)
    )
    return SuperLearner(task, specs, models, weights, k, risks, Z, fold, stratified)


def sl_predict(sl: SuperLearner, X) -> np.ndarray:
    """Weighted combination of the full-data candidate predictions."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] != sl.n_features:
        raise ShapeMismatchError(f"expected {sl.n_features} columns, got {X.shape[1]}")
    out = None
    for model, w in zip(sl.models, sl.weights):
        if w == 0.0:
            continue
        part = w * lrn.predict(model, X)
        out = part if out is None else out + part
    if sl.task.is_classification:
        out = out / out.sum(axis=1, keepdims=True)
    return out


__all__ = [
    "SuperLearner",
    "TrainedLearner",
    "LearnerSpec",
    "fit_super_learner",
    "make_folds",
    "simplex_objective",
    "sl_predict",
    "solve_simplex_weights",
]
