"""The DAG learner: one Super Learner per endogenous variable.

After :meth:`DagLearner.fit`, the learner estimates a 0/1 path effect for
every edge (:meth:`DagLearner.get_0_1_ate`) and simulates hard interventions
on any set of variables (:meth:`DagLearner.infer`) by overwriting the
intervened columns and re-predicting every descendant in causal order.

Discrete mediators are propagated in one of two modes.  ``"expected"``
(default) passes predicted class probabilities downstream, so a binary
mediator column holds ``P(1)``; ``"argmax"`` passes the most probable class.
Categorical mediator columns always hold the most probable code, and their
full distributions are stored in ``meta["probabilities"]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dag import Dag, VarType
from .errors import (
    ConfigError,
    EmptyInterventionError,
    InterventionTypeError,
    NotFittedError,
    UnknownNodeError,
)
from .learners import Task, parse_learners
from .scores import classification_scores, regression_scores
from .superlearner import SuperLearner, _child_seed, fit_super_learner, sl_predict
from .tabular import Dataset, check_values, design_layout, encode, require_columns

PROPAGATION_MODES = ("expected", "argmax")


@dataclass(frozen=True)
class InterventionSpec:
    """Variables to set and the values to set them to, ``do(X=1, C=0.5)``."""

    assignments: Mapping[str, float]

    def __post_init__(self):
        if not self.assignments:
            raise EmptyInterventionError("an intervention needs at least one variable")
        vals = {}
        for k, v in dict(self.assignments).items():
            v = float(v)
            if not np.isfinite(v):
                raise InterventionTypeError(f"intervention value for {k!r} is not finite")
            vals[str(k)] = v
        object.__setattr__(self, "assignments", vals)

    @classmethod
    def parse(cls, text: str) -> "InterventionSpec":
        """Parse ``"X=1,C=0.5"``."""
        out = {}
        for part in str(text).split(","):
            part = part.strip()
            if not part:
                continue
            m = re.fullmatch(r"([^=\s]+)\s*=\s*(\S+)", part)
            if m is None:
                raise ConfigError(f"cannot parse intervention {part!r}; expected VAR=VALUE")
            name, raw = m.groups()
            if name in out:
                raise ConfigError(f"variable {name!r} assigned twice")
            try:
                out[name] = float(raw)
            except ValueError:
                raise ConfigError(f"intervention value {raw!r} is not a number") from None
        return cls(out)

    @property
    def nodes(self) -> list[str]:
        return list(self.assignments)

    def check(self, dag: Dag) -> None:
        """Raise unless every variable exists and every value fits its type."""
        for name, value in self.assignments.items():
            if name not in dag.var_types:
                raise UnknownNodeError(f"intervention on unknown variable {name!r}")
            vt = dag.var_types[name]
            if vt.kind == "bin" and value not in (0.0, 1.0):
                raise InterventionTypeError(f"{name} is binary; cannot set it to {value:g}")
            if vt.kind == "cat" and (value != round(value) or not 0 <= value < vt.n_categories):
                raise InterventionTypeError(
                    f"{name} is categorical with codes 0..{vt.n_categories - 1}; "
                    f"cannot set it to {value:g}"
                )

    def to_dict(self) -> dict:
        return dict(self.assignments)


def as_spec(spec) -> InterventionSpec:
    if isinstance(spec, InterventionSpec):
        return spec
    if isinstance(spec, str):
        return InterventionSpec.parse(spec)
    return InterventionSpec(spec)


@dataclass(frozen=True)
class PathAteTable:
    """Estimated 0/1 effect per edge.

    Keys are ``(parent, child)``; for a categorical child there is one key
    per class, ``(parent, "child:c")``, holding the change in ``P(child=c)``.
    """

    entries: Mapping[tuple[str, str], float]

    def __getitem__(self, key):
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def to_json_dict(self) -> dict:
        return {f"{a}->{b}": float(v) for (a, b), v in self.entries.items()}


@dataclass(frozen=True)
class FitReport:
    """Out-of-fold prediction scores, CV risks and weights per endogenous variable."""

    metrics: dict
    cv_risks: dict
    weights: dict
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"fit": self.metrics, "cv_risks": self.cv_risks, "weights": self.weights}


class DagLearner:
    """Causal path model whose structural equations are Super Learners.

    Parameters
    ----------
    dag : Dag
    k : int
        Cross-validation folds per Super Learner.
    learners : str or sequence, optional
        Candidate tokens; defaults to all seven.
    baseline : bool
        Use linear/logistic regression only (a linear path model).
    propagation : {"expected", "argmax"}
        How predicted discrete mediators are passed to their children.
    seed : int
    """

    def __init__(self, dag: Dag, k: int = 6, learners=None, baseline: bool = False,
                 propagation: str = "expected", seed: int = 0):
        if int(k) < 2:
            raise ConfigError(f"k must be at least 2, got {k}")
        if propagation not in PROPAGATION_MODES:
            raise ConfigError(f"propagation must be one of {PROPAGATION_MODES}")
        self.dag = dag
        self.ordering = dag.ordering
        self.endogenous = dag.endogenous
        self.k = int(k)
        self.baseline = bool(baseline)
        self.specs = parse_learners(["LR"] if baseline else learners)
        self.propagation = propagation
        self.seed = int(seed)
        self.models: dict[str, SuperLearner] = {}
        self.report: FitReport | None = None
        self.fitted = False
        self._ranges: dict[str, tuple[float, float]] = {}

    def __repr__(self):
        state = "fitted" if self.fitted else "unfitted"
        return f"DagLearner({len(self.dag.nodes)} nodes, k={self.k}, {state})"

    # ------------------------------------------------------------------ fitting

    def predictors(self, node: str) -> list[tuple[str, VarType]]:
        return [(p, self.dag.var_types[p]) for p in self.dag.parents(node)]

    def fit(self, data: Dataset) -> FitReport:
        """Train a Super Learner for every variable with parents."""
        require_columns(data, self.dag.nodes)
        data.check_types({n: self.dag.var_types[n] for n in self.dag.nodes})
        models, metrics, risks, weights, warnings = {}, {}, {}, {}, []
        for node in self.endogenous:
            preds = self.predictors(node)
            X = np.hstack([encode(data[p], vt, p) for p, vt in preds])
            task = Task.from_vartype(self.dag.var_types[node])
            idx = self.dag.nodes.index(node)
            sl = fit_super_learner(X, data[node], task, self.k, self.specs,
                                   _child_seed(self.seed, idx), design_layout(preds))
            models[node] = sl
            oof = sl.oof_prediction
            if task.is_classification:
                metrics[node] = classification_scores(data[node], oof)
            else:
                metrics[node] = regression_scores(data[node], oof)
            risks[node] = dict(sl.cv_risks)
            weights[node] = sl.named_weights()
            if not sl.stratified:
                warnings.append(f"{node}: some class has fewer than {self.k} rows; "
                                "folds are not stratified")
        self.models = models
        self._ranges = {n: (float(data[n].min()), float(data[n].max()))
                        for n in self.dag.nodes} if data.n_rows else {}
        self.report = FitReport(metrics, risks, weights, warnings)
        self.fitted = True
        return self.report

    def _require_fitted(self):
        if not self.fitted:
            raise NotFittedError("call fit() before estimating effects")

    # -------------------------------------------------------------- path ATEs

    def get_0_1_ate(self, data: Dataset) -> PathAteTable:
        """Mean change in each child's prediction when one parent moves 0 -> 1.

        The other parents stay at their observed values.  Binary children
        report the change in ``P(child=1)``.
        """
        self._require_fitted()
        entries: dict[tuple[str, str], float] = {}
        for node in self.endogenous:
            preds = self.predictors(node)
            require_columns(data, [p for p, _ in preds])
            blocks = [encode(data[p], vt, p) for p, vt in preds]
            n = data.n_rows
            sl = self.models[node]
            vt_child = self.dag.var_types[node]
            for i, (p, vt) in enumerate(preds):
                arms = []
                for v in (1.0, 0.0):
                    b = list(blocks)
                    b[i] = encode(np.full(n, v), vt, p)
                    arms.append(sl_predict(sl, np.hstack(b)))
                diff = arms[0] - arms[1]
                if vt_child.kind == "cont":
                    entries[(p, node)] = float(np.mean(diff)) if n else 0.0
                elif vt_child.kind == "bin":
                    entries[(p, node)] = float(np.mean(diff[:, 1])) if n else 0.0
                else:
                    for c in range(vt_child.n_categories):
                        entries[(p, f"{node}:{c}")] = float(np.mean(diff[:, c])) if n else 0.0
        return PathAteTable(entries)

    # ------------------------------------------------------------ interventions

    def _propagate(self, data: Dataset, spec: InterventionSpec):
        self._require_fitted()
        spec.check(self.dag)
        require_columns(data, self.dag.nodes)
        n = data.n_rows
        columns: dict[str, np.ndarray] = {}
        blocks: dict[str, np.ndarray] = {}
        probs: dict[str, np.ndarray] = {}
        for name, value in spec.assignments.items():
            columns[name] = np.full(n, value)
            blocks[name] = encode(columns[name], self.dag.var_types[name], name)

        checked = set(blocks)

        def block(name):
            if name not in blocks:
                vt = self.dag.var_types[name]
                if name not in checked:
                    check_values(data[name], vt, name)
                    checked.add(name)
                blocks[name] = encode(data[name], vt, name)
            return blocks[name]

        for node in self.dag.update_set(spec.nodes):
            X = np.hstack([block(p) for p in self.dag.parents(node)])
            out = sl_predict(self.models[node], X)
            vt = self.dag.var_types[node]
            if vt.kind == "cont":
                columns[node] = out
                blocks[node] = out.reshape(-1, 1)
                continue
            probs[node] = out
            label = np.argmax(out, axis=1).astype(float)
            if vt.kind == "bin":
                if self.propagation == "expected":
                    columns[node] = out[:, 1].copy()
                else:
                    columns[node] = label
                blocks[node] = columns[node].reshape(-1, 1)
            else:
                columns[node] = label
                if self.propagation == "expected":
                    blocks[node] = out
                else:
                    blocks[node] = encode(label, vt, node)
        return columns, probs

    def _warnings(self, spec: InterventionSpec) -> list[str]:
        out = []
        for name, value in spec.assignments.items():
            lo, hi = self._ranges.get(name, (value, value))
            if value < lo or value > hi:
                out.append(f"{name}={value:g} lies outside the fitted range [{lo:g}, {hi:g}]")
        return out

    def infer(self, data: Dataset, spec) -> Dataset:
        """Interventional copy of ``data`` under ``do(spec)``.

        Intervened columns become constant, every descendant is re-predicted
        in ascending causal rank from its (possibly updated) parents, and all
        remaining columns are returned unchanged.
        """
        spec = as_spec(spec)
        columns, probs = self._propagate(data, spec)
        meta = dict(data.meta)
        meta["intervention"] = spec.to_dict()
        meta["warnings"] = list(meta.get("warnings", [])) + self._warnings(spec)
        if probs:
            meta["probabilities"] = probs
        return data.with_columns(columns, meta=meta)

    def _outcome_values(self, data, spec, outcome):
        node, _, cls = outcome.partition(":")
        if node not in self.dag.var_types:
            raise UnknownNodeError(f"unknown outcome {node!r}")
        vt = self.dag.var_types[node]
        if vt.kind == "cat" and not cls:
            raise ConfigError(f"{node} is categorical; name a class as '{node}:<code>'")
        if cls and vt.kind != "cat":
            raise ConfigError(f"{node} is not categorical; drop the ':{cls}' suffix")
        columns, probs = self._propagate(data, spec)
        if not cls:
            return columns.get(node, data[node])
        c = int(cls)
        if not 0 <= c < vt.n_categories:
            raise ConfigError(f"{node} has no class {c}")
        if node in probs:
            return probs[node][:, c].copy()
        values = columns.get(node, data[node])
        return (values == c).astype(float)

    def contrast(self, data: Dataset, spec_a, spec_b, outcome: str) -> tuple[float, np.ndarray]:
        """Per-row effect ``infer(spec_a)[outcome] - infer(spec_b)[outcome]`` and its mean.

        For a categorical outcome pass ``"Y:c"`` to contrast ``P(Y=c)``.
        """
        a = self._outcome_values(data, as_spec(spec_a), outcome)
        b = self._outcome_values(data, as_spec(spec_b), outcome)
        cate = np.asarray(a, float) - np.asarray(b, float)
        ate = float(np.mean(cate)) if cate.size else 0.0
        return ate, cate

    def moderation_sweep(self, data: Dataset, treatment: str, values: Sequence[float],
                         sweep: str, grid: Sequence[float], outcome: str) -> list[dict]:
        """Contrast of ``treatment`` at ``values[0]`` vs ``values[1]`` with ``sweep``
        held at each grid value."""
        a, b = values
        rows = []
        for m in grid:
            ate, _ = self.contrast(data, {treatment: a, sweep: m}, {treatment: b, sweep: m},
                                   outcome)
            rows.append({"value": float(m), "ate": ate})
        return rows

    # ----------------------------------------------------------------- output

    def report_json(self, ate: PathAteTable) -> dict:
        self._require_fitted()
        out = {"ate": ate.to_json_dict()}
        out.update(self.report.to_json_dict())
        return out


__all__ = [
    "DagLearner",
    "FitReport",
    "InterventionSpec",
    "PathAteTable",
    "PROPAGATION_MODES",
    "as_spec",
]
