"""Simulated structural causal models with known effects, and the
DAG-learner versus linear-baseline comparison protocol.

Five data generating processes are available:

``poly_mediation``
    ``X1 -> X2 -> Y`` with ``Y`` a cubic polynomial of ``X2``; ``X1`` has no
    direct effect on ``Y``.  The DAG includes the edge ``X1 -> Y`` so the
    (zero) direct effect can be estimated.
``linear_confounder``
    ``Z`` confounds a binary treatment ``X`` and outcome ``Y``; linear.
``nonlinear_confounder``
    ``Z1, Z2`` confound ``X`` and ``Y`` through interactions and squares.
``complex_linear``
    Twelve standard-normal variables joined by six linear edges.
``partial_mediation``
    Binary ``X`` acts on ``Y`` directly and through ``M``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dag import BIN, CONT, Dag
from .daglearner import DagLearner
from .errors import ConfigError
from .learners.linear import ridge_lstsq
from .parallel import pmap, replicate_seed
from .tabular import Dataset

DGP_KINDS = (
    "poly_mediation",
    "linear_confounder",
    "nonlinear_confounder",
    "complex_linear",
    "partial_mediation",
)

# default lambda grid for the polynomial sweep: lambda2 = lambda3 = value
DEFAULT_LAMBDA_GRID = tuple(np.linspace(0.0, 0.1, 10))

_DEFAULT_PARAMS = {
    "poly_mediation": {"lambda1": 0.5, "lambda2": 0.1, "lambda3": 0.1},
}

_COMPLEX_EDGES = {
    ("Z3", "Z4"): 0.1,
    ("Z2", "Z5"): -0.2,
    ("Z5", "Z6"): -0.3,
    ("Z7", "Z8"): 0.5,
    ("Z9", "Z10"): 0.4,
    ("Z10", "Z11"): 0.5,
}


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class DgpSpec:
    """Which process to simulate, its coefficients, sample size and seed."""

    kind: str
    n: int
    seed: int = 0
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DGP_KINDS:
            raise ConfigError(f"unknown DGP {self.kind!r}; choose from {', '.join(DGP_KINDS)}")
        if int(self.n) < 10:
            raise ConfigError(f"n must be at least 10, got {self.n}")
        allowed = _DEFAULT_PARAMS.get(self.kind, {})
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ConfigError(f"{self.kind} has no parameters {sorted(unknown)}")
        merged = dict(allowed)
        merged.update({k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", merged)
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class Simulation:
    """Generated data with its DAG and the true values of the named targets.

    ``truths`` maps a target name to its value.  Edge targets are written
    ``"A->B"``; the mediation process also has ``"total"``, ``"direct"`` and
    ``"indirect"``.  ``targets`` lists those scored by :func:`run_comparison`.
    """

    dataset: Dataset
    dag: Dag
    truths: dict
    targets: tuple


def generate(spec: DgpSpec) -> Simulation:
    """Draw ``spec.n`` rows from the requested process."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    kind = spec.kind
    if kind == "poly_mediation":
        l1, l2, l3 = spec.params["lambda1"], spec.params["lambda2"], spec.params["lambda3"]
        x1 = rng.standard_normal(n)
        x2 = 0.5 * x1 + rng.uniform(-10.0, 10.0, n)
        y = l1 * x2 + l2 * x2 ** 2 + l3 * x2 ** 3 + rng.standard_normal(n)
        cols = {"X1": x1, "X2": x2, "Y": y}
        dag = Dag(["X1", "X2", "Y"], [("X1", "X2"), ("X1", "Y"), ("X2", "Y")],
                  {"X1": CONT, "X2": CONT, "Y": CONT})
        truths = {"X1->Y": 0.0, "X1->X2": 0.5}
        targets = ("X1->Y",)
    elif kind == "linear_confounder":
        z = rng.standard_normal(n)
        x = (rng.random(n) < sigmoid(0.7 * z + rng.standard_normal(n))).astype(float)
        y = -0.7 * x + 0.8 * z + rng.standard_normal(n)
        cols = {"Z": z, "X": x, "Y": y}
        dag = Dag(["Z", "X", "Y"], [("Z", "X"), ("Z", "Y"), ("X", "Y")],
                  {"Z": CONT, "X": BIN, "Y": CONT})
        truths = {"X->Y": -0.7, "Z->Y": 0.8}
        targets = ("X->Y",)
    elif kind == "nonlinear_confounder":
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        logit = 0.7 * z1 + 0.4 * z1 * z2 + 0.4 * z2 + rng.standard_normal(n)
        x = (rng.random(n) < sigmoid(logit)).astype(float)
        y = 0.3 + 1.5 * x + 0.8 * z1 + 0.3 * z1 * z2 + 0.5 * z2 ** 2 + rng.standard_normal(n)
        cols = {"Z1": z1, "Z2": z2, "X": x, "Y": y}
        dag = Dag(["Z1", "Z2", "X", "Y"],
                  [("Z1", "X"), ("Z2", "X"), ("Z1", "Y"), ("Z2", "Y"), ("X", "Y")],
                  {"Z1": CONT, "Z2": CONT, "X": BIN, "Y": CONT})
        truths = {"X->Y": 1.5}
        targets = ("X->Y",)
    elif kind == "complex_linear":
        names = [f"Z{i}" for i in range(1, 13)]
        noise = {name: rng.standard_normal(n) for name in names}
        cols = {}
        parents = {child: (parent, coef) for (parent, child), coef in _COMPLEX_EDGES.items()}
        for name in names:  # every parent precedes its child in this order
            if name in parents:
                parent, coef = parents[name]
                cols[name] = coef * cols[parent] + noise[name]
            else:
                cols[name] = noise[name]
        dag = Dag(names, list(_COMPLEX_EDGES), {name: CONT for name in names})
        truths = {f"{a}->{b}": c for (a, b), c in _COMPLEX_EDGES.items()}
        targets = ("Z5->Z6",)
    else:  # partial_mediation
        x = (rng.random(n) < sigmoid(rng.standard_normal(n))).astype(float)
        m = 0.8 * x + rng.standard_normal(n)
        y = 0.5 * x + 0.8 * m + rng.standard_normal(n)
        cols = {"X": x, "M": m, "Y": y}
        dag = Dag(["X", "M", "Y"], [("X", "M"), ("X", "Y"), ("M", "Y")],
                  {"X": BIN, "M": CONT, "Y": CONT})
        truths = {"X->M": 0.8, "M->Y": 0.8, "X->Y": 0.5,
                  "direct": 0.5, "indirect": 0.64, "total": 1.14}
        targets = ("total", "direct", "indirect")
    return Simulation(Dataset(cols, meta={"dgp": kind}), dag, truths, targets)


def estimate_targets(learner: DagLearner, sim: Simulation) -> dict:
    """Fit ``learner`` to the simulated data and estimate every target."""
    learner.fit(sim.dataset)
    ate = learner.get_0_1_ate(sim.dataset)
    out = {}
    for target in sim.targets:
        if "->" in target:
            a, b = target.split("->")
            out[target] = ate[(a, b)]
        elif target == "direct":
            out[target] = ate[("X", "Y")]
        elif target == "indirect":
            out[target] = ate[("X", "M")] * ate[("M", "Y")]
        elif target == "total":
            out[target] = learner.contrast(sim.dataset, {"X": 1}, {"X": 0}, "Y")[0]
        else:
            raise ConfigError(f"unknown target {target!r}")
    return out


METHODS = ("slem", "baseline")


def _comparison_rep(job):
    kind, n, rep, seed, methods, k, learners, params = job
    sim = generate(DgpSpec(kind, n, replicate_seed(seed, rep * 100_003 + n), params))
    rows = []
    for method in methods:
        learner = DagLearner(sim.dag, k=k, learners=learners, baseline=(method == "baseline"),
                             seed=replicate_seed(seed + 1, rep * 100_003 + n))
        for target, est in estimate_targets(learner, sim).items():
            rows.append({
                "dgp": kind, "target": target, "method": method, "n": n, "rep": rep,
                "estimate": est, "abs_error": abs(est - sim.truths[target]),
            })
    return rows


@dataclass(frozen=True)
class ComparisonResult:
    """Row-level absolute errors plus summaries keyed by (target, method, n)."""

    rows: list
    summary: dict

    def errors(self, method: str, n: int, target: str | None = None) -> np.ndarray:
        return np.array([r["abs_error"] for r in self.rows
                         if r["method"] == method and r["n"] == n
                         and (target is None or r["target"] == target)])

    def estimates(self, method: str, n: int, target: str | None = None) -> np.ndarray:
        return np.array([r["estimate"] for r in self.rows
                         if r["method"] == method and r["n"] == n
                         and (target is None or r["target"] == target)])

    def mean_mae(self, method: str, n: int, target: str | None = None) -> float:
        return float(np.mean(self.errors(method, n, target)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dgp", "target", "method", "n", "rep", "estimate", "abs_error"])
            for r in self.rows:
                w.writerow([r["dgp"], r["target"], r["method"], r["n"], r["rep"],
                            format(r["estimate"], ".17g"), format(r["abs_error"], ".17g")])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")


def run_comparison(kind: str, n_grid: Sequence[int], reps: int, methods=METHODS,
                   seed: int = 0, k: int = 6, learners=None, params=None,
                   threads: int | None = None) -> ComparisonResult:
    """Absolute errors of each method's estimates over fresh replicate datasets.

    Parameters
    ----------
    kind : str
        One of :data:`DGP_KINDS`.
    n_grid : sequence of int
        Sample sizes.
    reps : int
        Datasets per sample size.
    methods : sequence of {"slem", "baseline"}
    threads : int, optional
        Worker processes; results do not depend on it.
    """
    if int(reps) < 1:
        raise ConfigError(f"reps must be at least 1, got {reps}")
    if not n_grid:
        raise ConfigError("empty sample-size grid")
    methods = tuple(methods)
    bad = set(methods) - set(METHODS)
    if bad or not methods:
        raise ConfigError(f"methods must be drawn from {METHODS}")
    DgpSpec(kind, min(n_grid), seed, params or {})  # validate early
    jobs = [(kind, int(n), rep, int(seed), methods, int(k), learners, dict(params or {}))
            for n in n_grid for rep in range(int(reps))]
    rows = [row for part in pmap(_comparison_rep, jobs, threads) for row in part]
    summary = {}
    for target in sorted({r["target"] for r in rows}):
        for method in methods:
            for n in n_grid:
                err = np.array([r["abs_error"] for r in rows if r["target"] == target
                                and r["method"] == method and r["n"] == int(n)])
                est = np.array([r["estimate"] for r in rows if r["target"] == target
                                and r["method"] == method and r["n"] == int(n)])
                summary.setdefault(target, {}).setdefault(method, {})[str(int(n))] = {
                    "mean_abs_error": float(err.mean()),
                    "median_abs_error": float(np.median(err)),
                    "mean_estimate": float(est.mean()),
                    "reps": int(err.size),
                }
    return ComparisonResult(rows, {"dgp": kind, "results": summary})


def _sweep_rep(job):
    n, lam, lambda1, rep, seed, k, learners = job
    sim = generate(DgpSpec("poly_mediation", n, replicate_seed(seed, rep),
                           {"lambda1": lambda1, "lambda2": lam, "lambda3": lam}))
    learner = DagLearner(sim.dag, k=k, learners=learners, seed=replicate_seed(seed + 1, rep))
    slem = estimate_targets(learner, sim)["X1->Y"]
    d = sim.dataset
    beta, _ = ridge_lstsq(np.column_stack([d["X1"], d["X2"]]), d["Y"], 0.0)
    return {"lambda": float(lam), "rep": rep, "slem": float(slem), "linear": float(beta[0])}


def lambda_sweep(n: int = 10_000, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                 reps: int = 20, seed: int = 0, lambda1: float = 0.5, k: int = 6,
                 learners=None, threads: int | None = None) -> list[dict]:
    """Estimated direct effect of ``X1`` on ``Y`` as the polynomial terms grow.

    For each grid value ``v`` the process uses ``lambda2 = lambda3 = v``.  The
    DAG learner's estimate is the 0/1 path effect on the edge ``X1 -> Y``; the
    linear estimate is the ``X1`` coefficient of ``Y ~ X1 + X2``.  Returns one
    row per grid value with per-method replicate estimates and means.
    """
    if int(reps) < 1:
        raise ConfigError(f"reps must be at least 1, got {reps}")
    jobs = [(int(n), float(lam), float(lambda1), rep, int(seed), int(k), learners)
            for lam in lambda_grid for rep in range(int(reps))]
    reps_out = pmap(_sweep_rep, jobs, threads)
    table = []
    for lam in lambda_grid:
        sel = [r for r in reps_out if r["lambda"] == float(lam)]
        slem = [r["slem"] for r in sel]
        lin = [r["linear"] for r in sel]
        table.append({
            "lambda": float(lam),
            "slem": slem,
            "linear": lin,
            "slem_mean": float(np.mean(slem)),
            "linear_mean": float(np.mean(lin)),
        })
    return table


__all__ = [
    "ComparisonResult",
    "DEFAULT_LAMBDA_GRID",
    "DGP_KINDS",
    "DgpSpec",
    "METHODS",
    "Simulation",
    "estimate_targets",
    "generate",
    "lambda_sweep",
    "run_comparison",
    "sigmoid",
]
