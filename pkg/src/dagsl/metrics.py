"""Treatment-effect error metrics and a benchmark harness for datasets whose
rows carry their true potential-outcome means (IHDP-style)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dag import BIN, CONT, Dag
from .daglearner import DagLearner
from .errors import (
    ConfigError,
    LengthMismatchError,
    MissingTruthColumnError,
    NonFiniteError,
    ParseError,
)
from .tabular import Dataset, read_csv


def e_ate(estimated: float, truth: float) -> float:
    """Absolute error of an average effect estimate."""
    estimated, truth = float(estimated), float(truth)
    if not (math.isfinite(estimated) and math.isfinite(truth)):
        raise NonFiniteError("e_ate needs finite inputs")
    return abs(estimated - truth)


def e_pehe(estimated_cate, true_cate) -> float:
    """Root mean squared difference between estimated and true per-row effects."""
    est = np.asarray(estimated_cate, dtype=float).reshape(-1)
    tru = np.asarray(true_cate, dtype=float).reshape(-1)
    if est.shape != tru.shape or est.size == 0:
        raise LengthMismatchError(
            f"effect vectors must have equal non-zero length, got {est.size} and {tru.size}"
        )
    if not (np.all(np.isfinite(est)) and np.all(np.isfinite(tru))):
        raise NonFiniteError("e_pehe needs finite inputs")
    d = est - tru
    # scale first so tiny differences do not underflow to zero when squared
    m = float(np.max(np.abs(d)))
    if m == 0.0:
        return 0.0
    return float(m * np.sqrt(np.mean((d / m) ** 2)))


@dataclass(frozen=True)
class GroundTruthEffects:
    """True average effect and, optionally, the true effect of every row."""

    true_ate: float
    true_cate: np.ndarray | None = None

    def __post_init__(self):
        if self.true_cate is not None:
            cate = np.asarray(self.true_cate, dtype=float).reshape(-1)
            if abs(float(cate.mean()) - float(self.true_ate)) > 1e-9:
                raise ConfigError("true_ate must equal the mean of true_cate")
            object.__setattr__(self, "true_cate", cate)

    @classmethod
    def from_cate(cls, cate) -> "GroundTruthEffects":
        cate = np.asarray(cate, dtype=float).reshape(-1)
        return cls(float(cate.mean()), cate)


@dataclass(frozen=True)
class BenchmarkConfig:
    """Estimator and split settings for :func:`evaluate_benchmark`.

    Rows with a non-zero ``split_column`` value are held out when that column
    exists; otherwise a seeded ``holdout`` fraction is held out.
    """

    k: int = 6
    learners: object = None
    baseline: bool = False
    seed: int = 0
    holdout: float = 0.1
    split_column: str = "oos"
    mu0: str = "mu0"
    mu1: str = "mu1"

    def __post_init__(self):
        if not 0.0 < float(self.holdout) < 1.0:
            raise ConfigError("holdout fraction must lie in (0, 1)")


# estimator(train, evaluation, dag, treatment, outcome) -> per-row effects on evaluation
Estimator = Callable[[Dataset, Dataset, Dag, str, str], np.ndarray]


def split_rows(data: Dataset, config: BenchmarkConfig) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the within-sample and out-of-sample rows."""
    n = data.n_rows
    if config.split_column in data:
        held = data[config.split_column] != 0
        return np.flatnonzero(~held), np.flatnonzero(held)
    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(n)
    n_out = max(1, int(round(float(config.holdout) * n)))
    return np.sort(perm[n_out:]), np.sort(perm[:n_out])


def _slem_estimator(config: BenchmarkConfig) -> Estimator:
    def estimate(train, evaluation, dag, treatment, outcome):
        learner = DagLearner(dag, k=config.k, learners=config.learners,
                             baseline=config.baseline, seed=config.seed)
        learner.fit(train)
        _, cate = learner.contrast(evaluation, {treatment: 1}, {treatment: 0}, outcome)
        return cate
    return estimate


def evaluate_benchmark(data: Dataset, dag: Dag, treatment: str, outcome: str,
                       config: BenchmarkConfig | None = None,
                       estimator: Estimator | None = None) -> dict:
    """Within- and out-of-sample ATE and PEHE errors against the truth columns.

    The estimator is trained on the within-sample rows only.  The default
    estimator fits a :class:`DagLearner` and contrasts ``do(treatment=1)``
    with ``do(treatment=0)``.
    """
    config = config or BenchmarkConfig()
    missing = [c for c in (config.mu0, config.mu1) if c not in data]
    if missing:
        raise MissingTruthColumnError(f"dataset lacks truth columns {missing}")
    truth = data[config.mu1] - data[config.mu0]
    within, oos = split_rows(data, config)
    if within.size < 2 or oos.size < 1:
        raise ConfigError("split leaves too few rows on one side")
    estimator = estimator or _slem_estimator(config)
    train = data.take(within)
    out = {}
    for label, rows in (("within", within), ("oos", oos)):
        cate = np.asarray(estimator(train, data.take(rows), dag, treatment, outcome), float)
        out[f"e_ate_{label}"] = e_ate(cate.mean(), truth[rows].mean())
        out[f"e_pehe_{label}"] = e_pehe(cate, truth[rows])
    return out


# ------------------------------------------------------------------- IHDP

IHDP_HEADERLESS = ["t", "y_factual", "y_cfactual", "mu0", "mu1"] + [f"x{i}" for i in range(1, 26)]


def load_ihdp(path) -> Dataset:
    """Read one IHDP replicate.

    Files with a header need columns ``t``, ``y_factual``, ``mu0``, ``mu1`` and
    covariates ``x1..``.  Header-less files are read in the common export
    order ``t, y_factual, y_cfactual, mu0, mu1, x1..x25``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        first = next(csv.reader(fh), None)
    if first is None:
        raise ParseError(f"{path}: empty file")
    try:
        float(first[0])
        headerless = True
    except ValueError:
        headerless = False
    if not headerless:
        data = read_csv(path)
    else:
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        if rows.shape[1] != len(IHDP_HEADERLESS):
            raise ParseError(f"{path}: expected {len(IHDP_HEADERLESS)} columns, got {rows.shape[1]}")
        data = Dataset({c: rows[:, i] for i, c in enumerate(IHDP_HEADERLESS)})
    needed = ["t", "y_factual", "mu0", "mu1"]
    missing = [c for c in needed if c not in data]
    if missing:
        raise MissingTruthColumnError(f"{path}: missing columns {missing}")
    return data


def ihdp_dag(data: Dataset, treatment: str = "t", outcome: str = "y_factual") -> Dag:
    """Covariates ``x*`` cause treatment and outcome; treatment causes outcome.

    Covariates whose values are all 0 or 1 are typed binary, others continuous.
    """
    covs = [c for c in data.names if c.startswith("x")]
    types = {}
    for c in covs:
        types[c] = BIN if np.all(np.isin(data[c], (0.0, 1.0))) else CONT
    types[treatment] = BIN
    types[outcome] = CONT
    edges = [(c, treatment) for c in covs] + [(c, outcome) for c in covs]
    edges.append((treatment, outcome))
    return Dag(covs + [treatment, outcome], edges, types)


def summarize_replicates(results: Sequence[dict]) -> dict:
    """Mean and standard error of each metric across replicate results."""
    if not results:
        raise ConfigError("no replicate results to summarize")
    out = {}
    for key in results[0]:
        v = np.array([r[key] for r in results], dtype=float)
        se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
        out[key] = {"mean": float(v.mean()), "se": se, "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0}
    out["replicates"] = len(results)
    return out


def evaluate_ihdp(paths: Sequence, config: BenchmarkConfig | None = None,
                  estimator: Estimator | None = None) -> dict:
    """Evaluate every replicate file and summarise the four error cells."""
    results = []
    for p in paths:
        data = load_ihdp(p)
        results.append(evaluate_benchmark(data, ihdp_dag(data), "t", "y_factual",
                                          config, estimator))
    return summarize_replicates(results)


__all__ = [
    "BenchmarkConfig",
    "GroundTruthEffects",
    "e_ate",
    "e_pehe",
    "evaluate_benchmark",
    "evaluate_ihdp",
    "ihdp_dag",
    "load_ihdp",
    "split_rows",
    "summarize_replicates",
]
