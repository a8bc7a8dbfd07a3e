"""Prediction-quality scores reported for each fitted outcome model."""
from __future__ import annotations

import numpy as np


def regression_scores(y, pred) -> dict:
    """MAE, MSE, median absolute error, R² and explained variance."""
    y = np.asarray(y, dtype=float)
    pred = np.asarray(pred, dtype=float)
    err = y - pred
    var = float(np.var(y))
    if var > 0:
        r2 = 1.0 - float(np.mean(err ** 2)) / var
        ev = 1.0 - float(np.var(err)) / var
    else:
        r2 = ev = 1.0 if np.allclose(err, 0.0) else 0.0
    return {
        "mae": float(np.mean(np.abs(err))),
        "mse": float(np.mean(err ** 2)),
        "median_ae": float(np.median(np.abs(err))),
        "r2": r2,
        "explained_variance": ev,
    }


def classification_scores(y, proba) -> dict:
    """Accuracy, balanced accuracy, precision, recall and F1.

    ``proba`` is an ``(n, C)`` probability matrix; labels are its argmax.
    Binary tasks score the positive class; multiclass tasks report macro
    averages over the classes present in ``y`` or predicted.
    """
    y = np.asarray(y).astype(np.int64)
    proba = np.asarray(proba, dtype=float)
    C = proba.shape[1]
    label = np.argmax(proba, axis=1)
    tp = np.array([np.sum((label == c) & (y == c)) for c in range(C)], dtype=float)
    pred_n = np.bincount(label, minlength=C).astype(float)
    true_n = np.bincount(y, minlength=C).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(pred_n > 0, tp / pred_n, 0.0)
        rec = np.where(true_n > 0, tp / true_n, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    seen = true_n > 0
    if C == 2:
        p, r, f = prec[1], rec[1], f1[1]
    else:
        used = seen | (pred_n > 0)
        p, r, f = prec[used].mean(), rec[used].mean(), f1[used].mean()
    return {
        "accuracy": float(np.mean(label == y)),
        "balanced_accuracy": float(rec[seen].mean()),
        "precision": float(p),
        "recall": float(r),
        "f1": float(f),
    }
