"""Nonparametric bootstrap of the whole fit-and-estimate pipeline."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dag import Dag
from .daglearner import DagLearner, InterventionSpec, as_spec
from .errors import BootstrapError, ConfigError, DagslError
from .parallel import pmap, replicate_seed
from .tabular import Dataset

MODES = ("ate", "intervention", "contrast")


@dataclass(frozen=True)
class BootstrapConfig:
    """Replicate count, resample size and the quantity to bootstrap.

    ``mode`` is ``"ate"`` (every path effect), ``"intervention"`` (mean of
    every variable under ``do(spec_a)``) or ``"contrast"`` (ATE of ``spec_a``
    versus ``spec_b`` on ``outcome``).  ``subsample_size`` defaults to the
    number of data rows.
    """

    num_bootstraps: int
    subsample_size: int | None = None
    k: int = 6
    mode: str = "ate"
    spec_a: InterventionSpec | None = None
    spec_b: InterventionSpec | None = None
    outcome: str | None = None
    learners: object = None
    baseline: bool = False
    propagation: str = "expected"
    seed: int = 0

    def __post_init__(self):
        if int(self.num_bootstraps) < 1:
            raise ConfigError("num_bootstraps must be positive")
        if self.subsample_size is not None and int(self.subsample_size) < 1:
            raise ConfigError("subsample_size must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.mode in ("intervention", "contrast") and self.spec_a is None:
            raise ConfigError(f"{self.mode} mode needs spec_a")
        if self.mode == "contrast" and (self.spec_b is None or not self.outcome):
            raise ConfigError("contrast mode needs spec_a, spec_b and outcome")
        for name in ("spec_a", "spec_b"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, as_spec(value))


@dataclass(frozen=True)
class BootstrapResult:
    """Replicate estimates and percentile intervals per target quantity."""

    estimates: dict
    failures: int
    num_bootstraps: int
    errors: list = field(default_factory=list)

    def mean(self, target: str) -> float:
        return float(np.mean(self.estimates[target]))

    def ci95(self, target: str) -> tuple[float, float]:
        return percentile_ci(self.estimates[target])

    def to_json_dict(self) -> dict:
        out = {}
        for target, values in self.estimates.items():
            lo, hi = self.ci95(target)
            out[target] = {
                "target": target,
                "estimates": [float(v) for v in values],
                "mean": self.mean(target),
                "ci95": [lo, hi],
                "failures": self.failures,
            }
        return out

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")


def percentile_ci(values, level: float = 0.95) -> tuple[float, float]:
    """Order-statistic interval: sorted values at ``floor(a(B-1))`` and ``ceil((1-a)(B-1))``
    with ``a = (1 - level) / 2``."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return (math.nan, math.nan)
    a = (1.0 - level) / 2.0
    last = v.size - 1
    lo = int(math.floor(a * last + 1e-9))
    hi = int(math.ceil((1.0 - a) * last - 1e-9))
    return float(v[lo]), float(v[hi])


def _targets(learner: DagLearner, data: Dataset, config: BootstrapConfig) -> dict:
    if config.mode == "ate":
        return learner.get_0_1_ate(data).to_json_dict()
    if config.mode == "intervention":
        out = learner.infer(data, config.spec_a)
        return {name: float(np.mean(out[name])) for name in learner.dag.nodes}
    ate, _ = learner.contrast(data, config.spec_a, config.spec_b, config.outcome)
    return {f"contrast:{config.outcome}": ate}


def _replicate(job):
    index, data, dag, config, size = job
    rng = np.random.default_rng(replicate_seed(config.seed, index))
    rows = rng.integers(0, data.n_rows, size)
    sample = data.take(rows)
    learner = DagLearner(dag, k=config.k, learners=config.learners, baseline=config.baseline,
                         propagation=config.propagation,
                         seed=replicate_seed(config.seed + 1, index))
    try:
        learner.fit(sample)
        return _targets(learner, sample, config), None
    except DagslError as exc:
        return None, f"replicate {index}: {type(exc).__name__}: {exc}"


def run_bootstrap(config: BootstrapConfig, data: Dataset, dag: Dag,
                  threads: int | None = None) -> BootstrapResult:
    """Refit the DAG learner on resampled rows (with replacement) and collect targets.

    Replicate ``i`` draws its rows and learner seed from streams derived only
    from ``(config.seed, i)``, so results do not depend on ``threads``.
    Replicates that fail on a degenerate resample are counted; more than half
    failing raises :class:`BootstrapError`.
    """
    size = data.n_rows if config.subsample_size is None else int(config.subsample_size)
    if size > data.n_rows:
        raise ConfigError(f"subsample_size {size} exceeds the {data.n_rows} data rows")
    for spec in (config.spec_a, config.spec_b):
        if spec is not None:
            spec.check(dag)
    if config.outcome is not None:
        node = config.outcome.partition(":")[0]
        if node not in dag.var_types:
            raise ConfigError(f"unknown outcome {config.outcome!r}")
    jobs = [(i, data, dag, config, size) for i in range(int(config.num_bootstraps))]
    results = pmap(_replicate, jobs, threads)
    errors = [err for _, err in results if err is not None]
    if len(errors) * 2 > len(results):
        raise BootstrapError(
            f"{len(errors)} of {len(results)} replicates failed; first: {errors[0]}"
        )
    estimates: dict[str, list] = {}
    for est, _ in results:
        if est is None:
            continue
        for target, value in est.items():
            estimates.setdefault(target, []).append(float(value))
    return BootstrapResult({t: np.array(v) for t, v in estimates.items()}, len(errors),
                           int(config.num_bootstraps), errors)


__all__ = ["BootstrapConfig", "BootstrapResult", "MODES", "percentile_ci", "run_bootstrap"]
