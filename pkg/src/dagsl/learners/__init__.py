"""Candidate learners behind a single ``fit`` / ``predict`` interface.

Tokens (case-insensitive): ``LR``, ``Elastic``, ``Poly``, ``RF``, ``GB``,
``MLP``, ``BR``.  Every learner handles regression, binary and multiclass
targets; classification predictions are row-stochastic ``(n, n_classes)``
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ..dag import VarType
from ..errors import ConfigError, DegenerateDataError, NonFiniteError, ShapeMismatchError
from .elastic import fit_elastic
from .linear import fit_bayes, fit_lr, fit_poly
from .mlp import fit_mlp
from .trees import fit_boosting, fit_forest

LEARNER_KINDS = ("LR", "Elastic", "Poly", "RF", "GB", "MLP", "BR")

_FITTERS = {
    "LR": fit_lr,
    "Elastic": fit_elastic,
    "Poly": fit_poly,
    "RF": fit_forest,
    "GB": fit_boosting,
    "MLP": fit_mlp,
    "BR": fit_bayes,
}

_CANON = {k.lower(): k for k in LEARNER_KINDS}


@dataclass(frozen=True)
class Task:
    kind: str
    n_classes: int = 0

    def __post_init__(self):
        if self.kind == "regression":
            object.__setattr__(self, "n_classes", 0)
        elif self.kind == "binary":
            object.__setattr__(self, "n_classes", 2)
        elif self.kind == "multiclass":
            if self.n_classes < 2:
                raise ConfigError("multiclass task needs n_classes >= 2")
        else:
            raise ConfigError(f"unknown task kind {self.kind!r}")

    @classmethod
    def from_vartype(cls, vt: VarType) -> "Task":
        if vt.kind == "cont":
            return cls("regression")
        if vt.kind == "bin":
            return cls("binary")
        return cls("multiclass", vt.n_categories)

    @property
    def is_classification(self) -> bool:
        return self.kind != "regression"


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        canon = _CANON.get(str(self.kind).lower())
        if canon is None:
            raise ConfigError(
                f"unknown learner {self.kind!r}; choose from {', '.join(LEARNER_KINDS)}"
            )
        object.__setattr__(self, "kind", canon)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def name(self) -> str:
        return self.kind


def parse_learners(tokens: Iterable | str | None) -> list[LearnerSpec]:
    """Turn tokens (or a comma-separated string) into specs; None means all."""
    if tokens is None:
        tokens = LEARNER_KINDS
    elif isinstance(tokens, str):
        tokens = [t for t in tokens.split(",") if t.strip()]
    specs = [t if isinstance(t, LearnerSpec) else LearnerSpec(str(t).strip()) for t in tokens]
    if not specs:
        raise ConfigError("empty learner list")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate learners in {names}")
    return specs


@dataclass(frozen=True)
class _Constant:
    value: np.ndarray
    classification: bool

    def predict(self, X):
        n = X.shape[0]
        if self.classification:
            return np.tile(self.value, (n, 1))
        return np.full(n, float(self.value))


@dataclass(frozen=True)
class _Embedded:
    """Classifier trained on a subset of classes, widened back to all classes."""

    inner: object
    classes: np.ndarray
    n_classes: int

    def predict(self, X):
        sub = self.inner.predict(X)
        out = np.zeros((sub.shape[0], self.n_classes))
        out[:, self.classes] = sub
        return out


@dataclass(frozen=True)
class TrainedLearner:
    spec: LearnerSpec
    task: Task
    n_features: int
    model: object = field(repr=False)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.model, _Constant)


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise DegenerateDataError("at least two rows are needed to fit a learner")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("training data contain NaN or infinite values")
    return np.ascontiguousarray(X), y


def fit(spec: LearnerSpec | str, X, y, task: Task, seed: int = 0,
        continuous=None) -> TrainedLearner:
    """Train one candidate learner.

    ``continuous`` flags the design columns to standardise (default: all);
    classification targets are integer class codes.  Zero-variance outcomes
    and single-class outcomes give a constant predictor.
    """
    if not isinstance(spec, LearnerSpec):
        spec = LearnerSpec(spec)
    X, y = _check_xy(X, y)
    p = X.shape[1]
    continuous = np.ones(p, dtype=bool) if continuous is None else np.asarray(continuous, bool)
    if continuous.shape != (p,):
        raise ShapeMismatchError("continuous mask does not match the number of columns")
    fitter = _FITTERS[spec.kind]

    if not task.is_classification:
        if np.ptp(y) == 0.0:
            return TrainedLearner(spec, task, p, _Constant(np.array(y[0]), False))
        return TrainedLearner(spec, task, p, fitter(X, y, task, seed, continuous, **spec.params))

    codes = y.astype(np.int64)
    if np.any(codes != y) or codes.min() < 0 or codes.max() >= task.n_classes:
        raise DegenerateDataError(f"class codes must be integers in 0..{task.n_classes - 1}")
    present = np.unique(codes)
    if present.size == 1:
        value = np.zeros(task.n_classes)
        value[present[0]] = 1.0
        return TrainedLearner(spec, task, p, _Constant(value, True))
    if present.size < task.n_classes:
        remap = np.searchsorted(present, codes)
        sub = Task("binary") if present.size == 2 else Task("multiclass", int(present.size))
        inner = fitter(X, remap, sub, seed, continuous, **spec.params)
        return TrainedLearner(spec, task, p, _Embedded(inner, present, task.n_classes))
    return TrainedLearner(spec, task, p, fitter(X, codes, task, seed, continuous, **spec.params))


def predict(model: TrainedLearner, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] != model.n_features:
        raise ShapeMismatchError(
            f"expected {model.n_features} columns, got {X.shape[1]}"
        )
    out = model.model.predict(np.ascontiguousarray(X))
    if model.task.is_classification:
        out = np.clip(out, 0.0, 1.0)
        out = out / out.sum(axis=1, keepdims=True)
    return out


__all__ = [
    "LEARNER_KINDS",
    "LearnerSpec",
    "Task",
    "TrainedLearner",
    "fit",
    "parse_learners",
    "predict",
]
