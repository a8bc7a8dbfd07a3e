"""CART trees, random forests and gradient boosting.

One tree builder serves every case.  Splits maximise the reduction in summed
squared error of a (possibly multi-column) target; on one-hot class targets
that reduction equals the size-weighted Gini reduction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .linear import _softmax


@njit(cache=True)
def presort(X):
    """Per-feature argsort of the rows of ``X``, shape ``(p, n)``."""
    n, p = X.shape
    out = np.empty((p, n), dtype=np.int64)
    for f in range(p):
        out[f] = np.argsort(X[:, f], kind="mergesort")
    return out


@njit(cache=True)
def resample_order(global_order, rows, n):
    """Sorted position lists for a resample ``rows`` of ``n`` base rows.

    Positions index into ``rows``; duplicates of a base row stay adjacent.
    """
    m = rows.shape[0]
    p = global_order.shape[0]
    offs = np.zeros(n + 1, dtype=np.int64)
    for j in range(m):
        offs[rows[j] + 1] += 1
    for s in range(n):
        offs[s + 1] += offs[s]
    fill = offs[:-1].copy()
    by_row = np.empty(m, dtype=np.int64)
    for j in range(m):
        by_row[fill[rows[j]]] = j
        fill[rows[j]] += 1
    out = np.empty((p, m), dtype=np.int64)
    for f in range(p):
        k = 0
        for s in global_order[f]:
            for j in range(offs[s], offs[s + 1]):
                out[f, k] = by_row[j]
                k += 1
    return out


@njit(cache=True)
def build_tree(X, Y, rows, order, max_depth, min_leaf, mtry, seed):
    """Grow one tree on ``X[rows]`` / ``Y[rows]`` (rows may repeat).

    ``order[f]`` lists positions ``0 .. len(rows) - 1`` sorted by feature f.
    Returns node arrays ``(feature, threshold, left, right, value)`` and, for
    every position, the id of the leaf it lands in.  ``max_depth`` < 0 means
    unlimited.
    """
    np.random.seed(seed)
    m_total = rows.shape[0]
    p = X.shape[1]
    d = Y.shape[1]
    cap = 2 * m_total + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, d))
    leaf_of = np.empty(m_total, dtype=np.int64)

    # row p tracks positions in ascending order; node sums run over it so that
    # their rounding does not depend on which column comes first
    ordr = np.empty((p + 1, m_total), dtype=np.int64)
    ordr[:p] = order
    for i in range(m_total):
        ordr[p, i] = i
    buf = np.empty(m_total, dtype=np.int64)
    goes_left = np.zeros(m_total, dtype=np.bool_)
    feats = np.arange(p)
    S = np.empty(d)
    SL = np.empty(d)

    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    top = 1
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = m_total
    st_depth[0] = 0
    n_nodes = 1

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        m = end - start

        S[:] = 0.0
        ss = 0.0
        for i in range(start, end):
            r = rows[ordr[p, i]]
            for k in range(d):
                y = Y[r, k]
                S[k] += y
                ss += y * y
        base = 0.0
        for k in range(d):
            value[node, k] = S[k] / m
            base += S[k] * S[k]
        base /= m
        impurity = ss - base

        best_f = -1
        best_thr = 0.0
        if (max_depth < 0 or depth < max_depth) and m >= 2 * min_leaf \
                and impurity > 1e-12 * (ss + 1e-300):
            best_score = base + 1e-12 * impurity
            if mtry < p:
                for a in range(mtry):
                    b = a + np.random.randint(p - a)
                    tmp = feats[a]
                    feats[a] = feats[b]
                    feats[b] = tmp
                n_try = mtry
            else:
                for a in range(p):
                    feats[a] = a
                n_try = p
            for fi in range(n_try):
                f = feats[fi]
                SL[:] = 0.0
                r = rows[ordr[f, start]]
                v1 = X[r, f]
                for i in range(m - min_leaf):
                    v0 = v1
                    for k in range(d):
                        SL[k] += Y[r, k]
                    r = rows[ordr[f, start + i + 1]]
                    v1 = X[r, f]
                    nl = i + 1
                    if nl < min_leaf or v1 <= v0:
                        continue
                    nr = m - nl
                    sl2 = 0.0
                    sr2 = 0.0
                    for k in range(d):
                        sl2 += SL[k] * SL[k]
                        dr = S[k] - SL[k]
                        sr2 += dr * dr
                    score = sl2 / nl + sr2 / nr
                    if score < best_score:
                        continue
                    thr = 0.5 * (v0 + v1)
                    if thr >= v1:
                        thr = v0
                    # exact ties (same partition via another feature) go to the lower
                    # threshold so the choice does not depend on column order
                    if score > best_score or (best_f >= 0 and thr < best_thr):
                        best_score = score
                        best_f = f
                        best_thr = thr

        if best_f < 0:
            for i in range(start, end):
                leaf_of[ordr[p, i]] = node
            continue

        n_left = 0
        for i in range(start, end):
            q = ordr[p, i]
            g = X[rows[q], best_f] <= best_thr
            goes_left[q] = g
            if g:
                n_left += 1
        mid = start + n_left
        for f in range(p + 1):
            a = start
            b = 0
            for i in range(start, end):
                q = ordr[f, i]
                if goes_left[q]:
                    ordr[f, a] = q
                    a += 1
                else:
                    buf[b] = q
                    b += 1
            for i in range(b):
                ordr[f, mid + i] = buf[i]
        lo = n_nodes
        hi = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lo
        right[node] = hi
        st_node[top] = hi
        st_start[top] = mid
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lo
        st_start[top] = start
        st_end[top] = mid
        st_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), leaf_of)


@njit(cache=True)
def apply_tree(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X):
        return apply_tree(self.feature, self.threshold, self.left, self.right, X)


def grow(X, Y, rows, order, max_depth, min_leaf, mtry, seed):
    f, t, l, r, v, leaf_of = build_tree(
        X, np.ascontiguousarray(Y, dtype=np.float64), rows.astype(np.int64), order,
        int(max_depth), int(min_leaf), int(mtry), int(seed)
    )
    return Tree(f, t, l, r, v), leaf_of


def _as_float(X):
    return np.ascontiguousarray(X, dtype=np.float64)


# ----------------------------------------------------------------- random forest

@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    classification: bool

    def predict(self, X):
        X = _as_float(X)
        acc = 0.0
        for tree in self.trees:
            acc = acc + tree.value[tree.apply(X)]
        out = acc / len(self.trees)
        return out if self.classification else out[:, 0]


def fit_forest(X, y, task, seed, continuous, n_trees=100, min_leaf=5, max_depth=-1,
               max_features=None, bootstrap=True):
    """Bagged CART trees.  ``max_features`` is a fraction of p; default
    sqrt(p) for classification and p/3 for regression."""
    X = _as_float(X)
    n, p = X.shape
    if task.is_classification:
        Y = np.zeros((n, task.n_classes))
        Y[np.arange(n), y] = 1.0
        mtry = np.sqrt(p) if max_features is None else max_features * p
    else:
        Y = y.reshape(-1, 1).astype(float)
        mtry = p / 3.0 if max_features is None else max_features * p
    mtry = int(min(p, max(1, int(mtry))))
    rng = np.random.default_rng(seed)
    sorted_rows = presort(X)
    trees = []
    for _ in range(int(n_trees)):
        if bootstrap:
            rows = rng.integers(0, n, n)
            order = resample_order(sorted_rows, rows, n)
        else:
            rows, order = np.arange(n), sorted_rows
        tree, _ = grow(X, Y, rows, order, max_depth, min_leaf, mtry, rng.integers(2 ** 31 - 1))
        trees.append(tree)
    return ForestModel(tuple(trees), task.is_classification)


# ------------------------------------------------------------- gradient boosting

@dataclass(frozen=True)
class BoostModel:
    base: np.ndarray
    trees: tuple          # one tuple of per-output trees per round
    learning_rate: float
    task_kind: str

    def raw(self, X):
        X = _as_float(X)
        F = np.tile(self.base, (X.shape[0], 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                F[:, k] += self.learning_rate * tree.value[tree.apply(X), 0]
        return F

    def predict(self, X):
        F = self.raw(X)
        if self.task_kind == "regression":
            return F[:, 0]
        if self.task_kind == "binary":
            p1 = 1.0 / (1.0 + np.exp(-F[:, 0]))
            return np.column_stack([1.0 - p1, p1])
        return _softmax(F)


def _leaf_values(leaf_of, n_nodes, num, den):
    s = np.bincount(leaf_of, weights=num, minlength=n_nodes)
    h = np.bincount(leaf_of, weights=den, minlength=n_nodes)
    return np.where(h > 1e-12, s / np.maximum(h, 1e-12), 0.0)


def fit_boosting(X, y, task, seed, continuous, n_rounds=200, max_depth=3,
                 learning_rate=0.1, min_leaf=1):
    """Gradient boosting with squared loss (regression), binomial deviance
    (binary) or multinomial deviance with one tree per class (multiclass)."""
    X = _as_float(X)
    n, p = X.shape
    lr = float(learning_rate)
    rng = np.random.default_rng(seed)
    rows = np.arange(n)
    order = presort(X)
    rounds = []

    def step(target, num, den):
        tree, leaf_of = grow(X, target.reshape(-1, 1), rows, order, max_depth, min_leaf, p,
                             rng.integers(2 ** 31 - 1))
        vals = _leaf_values(leaf_of, tree.value.shape[0], num, den)
        return Tree(tree.feature, tree.threshold, tree.left, tree.right, vals[:, None]), vals[leaf_of]

    if not task.is_classification:
        y = y.astype(float)
        base = np.array([y.mean()])
        F = np.full(n, base[0])
        for _ in range(int(n_rounds)):
            r = y - F
            tree, upd = step(r, r, np.ones(n))
            F = F + lr * upd
            rounds.append((tree,))
        return BoostModel(base, tuple(rounds), lr, "regression")

    C = task.n_classes
    prior = np.bincount(y, minlength=C) / n
    if C == 2:
        p1 = np.clip(prior[1], 1e-12, 1 - 1e-12)
        base = np.array([np.log(p1 / (1 - p1))])
        F = np.full(n, base[0])
        yb = y.astype(float)
        for _ in range(int(n_rounds)):
            prob = 1.0 / (1.0 + np.exp(-F))
            r = yb - prob
            tree, upd = step(r, r, prob * (1 - prob))
            F = F + lr * upd
            rounds.append((tree,))
        return BoostModel(base, tuple(rounds), lr, "binary")

    base = np.log(np.clip(prior, 1e-12, None))
    F = np.tile(base, (n, 1))
    Y = np.zeros((n, C))
    Y[np.arange(n), y] = 1.0
    for _ in range(int(n_rounds)):
        P = _softmax(F)
        trees = []
        for k in range(C):
            r = Y[:, k] - P[:, k]
            tree, upd = step(r, (C - 1) / C * r, np.abs(r) * (1 - np.abs(r)))
            F[:, k] += lr * upd
            trees.append(tree)
        rounds.append(tuple(trees))
    return BoostModel(base, tuple(rounds), lr, "multiclass")
