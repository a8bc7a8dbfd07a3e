import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagsl.bootstrap import BootstrapConfig, percentile_ci, run_bootstrap
from dagsl.daglearner import DagLearner
from dagsl.errors import BootstrapError, ConfigError, DegenerateDataError
from dagsl.learners import LearnerSpec
from dagsl.parallel import replicate_seed
from dagsl.simulate import DgpSpec, generate

LIGHT = [LearnerSpec("LR"), LearnerSpec("GB", {"n_rounds": 20})]


@pytest.fixture(scope="module")
def eq6():
    return generate(DgpSpec("linear_confounder", 300, seed=3))


def cfg(**kw):
    base = dict(num_bootstraps=4, k=3, learners=LIGHT, seed=9)
    base.update(kw)
    return BootstrapConfig(**base)


def sort_oracle(values, level=0.95):
    # nearest-rank style endpoints written out by hand
    v = sorted(values)
    B = len(v)
    a = (1 - level) / 2
    lo_pos = a * (B - 1)
    hi_pos = (1 - a) * (B - 1)
    lo = int(lo_pos) if abs(lo_pos - round(lo_pos)) > 1e-9 else int(round(lo_pos))
    hi = -int(-hi_pos // 1) if abs(hi_pos - round(hi_pos)) > 1e-9 else int(round(hi_pos))
    return v[lo], v[hi]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=300))
def test_ci_endpoints_are_order_statistics(values):
    lo, hi = percentile_ci(values)
    assert (lo, hi) == sort_oracle(values)
    assert lo <= hi and lo in values and hi in values


def test_ci_known_values():
    v = np.arange(1.0, 101.0)[::-1]  # 100 values
    # a(B-1) = 2.475 -> index 2, (1-a)(B-1) = 96.525 -> index 97
    assert percentile_ci(v) == (3.0, 98.0)
    assert percentile_ci([4.2]) == (4.2, 4.2)
    assert all(math.isnan(x) for x in percentile_ci([]))


def test_single_replicate_degenerate_ci(eq6):
    res = run_bootstrap(cfg(num_bootstraps=1), eq6.dataset, eq6.dag, threads=1)
    for t, v in res.estimates.items():
        assert v.shape == (1,)
        assert res.ci95(t) == (v[0], v[0]) and res.mean(t) == v[0]


def test_ate_mode_targets(eq6):
    res = run_bootstrap(cfg(), eq6.dataset, eq6.dag, threads=1)
    assert set(res.estimates) == {"Z->X", "Z->Y", "X->Y"}
    assert res.failures == 0
    for v in res.estimates.values():
        assert len(v) == res.num_bootstraps - res.failures


def test_seed_determinism_and_sensitivity(eq6):
    a = run_bootstrap(cfg(), eq6.dataset, eq6.dag, threads=1)
    b = run_bootstrap(cfg(), eq6.dataset, eq6.dag, threads=1)
    c = run_bootstrap(cfg(seed=10), eq6.dataset, eq6.dag, threads=1)
    for t in a.estimates:
        np.testing.assert_array_equal(a.estimates[t], b.estimates[t])
    assert not np.array_equal(a.estimates["X->Y"], c.estimates["X->Y"])


def test_parallel_matches_serial(eq6):
    config = cfg(mode="contrast", spec_a={"X": 1}, spec_b={"X": 0}, outcome="Y")
    serial = run_bootstrap(config, eq6.dataset, eq6.dag, threads=1)
    pooled = run_bootstrap(config, eq6.dataset, eq6.dag, threads=2)
    np.testing.assert_array_equal(serial.estimates["contrast:Y"], pooled.estimates["contrast:Y"])


def test_intervention_mode(eq6):
    res = run_bootstrap(cfg(mode="intervention", spec_a={"X": 1}), eq6.dataset, eq6.dag,
                        threads=1)
    assert set(res.estimates) == {"Z", "X", "Y"}
    np.testing.assert_array_equal(res.estimates["X"], 1.0)


def test_subsample_size(eq6):
    res = run_bootstrap(cfg(subsample_size=100), eq6.dataset, eq6.dag, threads=1)
    assert res.failures == 0
    with pytest.raises(ConfigError):
        run_bootstrap(cfg(subsample_size=301), eq6.dataset, eq6.dag, threads=1)


def test_json_layout(eq6, tmp_path):
    res = run_bootstrap(cfg(num_bootstraps=3), eq6.dataset, eq6.dag, threads=1)
    path = tmp_path / "b.json"
    res.write_json(path)
    doc = json.loads(path.read_text())
    entry = doc["X->Y"]
    assert set(entry) == {"target", "estimates", "mean", "ci95", "failures"}
    assert len(entry["estimates"]) == 3 and entry["ci95"][0] <= entry["ci95"][1]


@pytest.mark.parametrize("kw", [
    dict(num_bootstraps=0),
    dict(subsample_size=0),
    dict(mode="bca"),
    dict(mode="intervention"),
    dict(mode="contrast", spec_a={"X": 1}, outcome="Y"),
    dict(mode="contrast", spec_a={"X": 1}, spec_b={"X": 0}),
])
def test_config_errors(kw):
    with pytest.raises(ConfigError):
        cfg(**kw)


def test_unknown_outcome_rejected(eq6):
    config = cfg(mode="contrast", spec_a={"X": 1}, spec_b={"X": 0}, outcome="Q")
    with pytest.raises(ConfigError):
        run_bootstrap(config, eq6.dataset, eq6.dag, threads=1)


def _failing_fit(bad):
    original = DagLearner.fit

    def fit(self, data):
        if bad(self.seed):
            raise DegenerateDataError("injected")
        return original(self, data)
    return fit


def test_failures_counted(eq6, monkeypatch):
    seeds = [replicate_seed(10, i) for i in range(6)]
    bad = set(seeds[:2])
    monkeypatch.setattr(DagLearner, "fit", _failing_fit(lambda s: s in bad))
    res = run_bootstrap(cfg(num_bootstraps=6), eq6.dataset, eq6.dag, threads=1)
    assert res.failures == 2 and len(res.errors) == 2
    assert all(len(v) == 4 for v in res.estimates.values())
    assert res.to_json_dict()["X->Y"]["failures"] == 2


def test_majority_failure_is_fatal(eq6, monkeypatch):
    monkeypatch.setattr(DagLearner, "fit", _failing_fit(lambda s: True))
    with pytest.raises(BootstrapError):
        run_bootstrap(cfg(), eq6.dataset, eq6.dag, threads=1)


def test_coverage_of_known_effect():
    # 50 resamples of 500 rows drawn from 1000: the percentile interval covers -0.7
    sim = generate(DgpSpec("linear_confounder", 1000, seed=0))
    config = BootstrapConfig(50, subsample_size=500, k=4, learners="LR,GB,BR", seed=0)
    res = run_bootstrap(config, sim.dataset, sim.dag)
    lo, hi = res.ci95("X->Y")
    assert lo <= -0.7 <= hi
    assert res.failures == 0 and res.estimates["X->Y"].shape == (50,)
