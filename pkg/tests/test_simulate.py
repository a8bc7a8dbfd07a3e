import csv
import json

import numpy as np
import pytest

from dagsl.errors import ConfigError
from dagsl.learners import LearnerSpec
from dagsl.simulate import (
    DEFAULT_LAMBDA_GRID,
    DGP_KINDS,
    DgpSpec,
    generate,
    lambda_sweep,
    run_comparison,
)

N_MC = 1_000_000


def expit(x):
    return 1 / (1 + np.exp(-x))


# Independent brute-force oracles: each arm is simulated with its own draws
# straight from the structural equations, with the intervened variable forced.

def oracle_linear_confounder(rng):
    def arm(x):
        z = rng.standard_normal(N_MC)
        return (-0.7 * x + 0.8 * z + rng.standard_normal(N_MC)).mean()
    return {"X->Y": arm(1.0) - arm(0.0)}


def oracle_nonlinear_confounder(rng):
    def arm(x):
        z1, z2 = rng.standard_normal(N_MC), rng.standard_normal(N_MC)
        y = 0.3 + 1.5 * x + 0.8 * z1 + 0.3 * z1 * z2 + 0.5 * z2 ** 2 + rng.standard_normal(N_MC)
        return y.mean()
    return {"X->Y": arm(1.0) - arm(0.0)}


def oracle_poly_mediation(rng):
    # controlled direct effect with common random numbers; the cubic term makes
    # independent arms far too noisy for a 0.01 tolerance
    x1_nat = rng.standard_normal(N_MC)
    x2 = 0.5 * x1_nat + rng.uniform(-10, 10, N_MC)
    u = rng.standard_normal(N_MC)

    def y(x1):
        # structural equation of Y with an explicit (zero) X1 slot
        return 0.0 * x1 + 0.5 * x2 + 0.1 * x2 ** 2 + 0.1 * x2 ** 3 + u

    return {"X1->Y": float((y(1.0) - y(0.0)).mean())}


def oracle_complex_linear(rng):
    def arm(z5):
        z6 = -0.3 * z5 + rng.standard_normal(N_MC)
        return z6.mean()
    return {"Z5->Z6": arm(1.0) - arm(0.0)}


def oracle_partial_mediation(rng):
    def y_mean(x, m_from):
        m = 0.8 * m_from + rng.standard_normal(N_MC)
        return (0.5 * x + 0.8 * m + rng.standard_normal(N_MC)).mean()
    total = y_mean(1, 1) - y_mean(0, 0)
    direct = y_mean(1, 0) - y_mean(0, 0)
    indirect = y_mean(1, 1) - y_mean(1, 0)
    return {"total": total, "direct": direct, "indirect": indirect}


ORACLES = {
    "linear_confounder": oracle_linear_confounder,
    "nonlinear_confounder": oracle_nonlinear_confounder,
    "poly_mediation": oracle_poly_mediation,
    "complex_linear": oracle_complex_linear,
    "partial_mediation": oracle_partial_mediation,
}


@pytest.mark.parametrize("kind", DGP_KINDS)
def test_declared_truths_match_monte_carlo(kind):
    sim = generate(DgpSpec(kind, 10))
    mc = ORACLES[kind](np.random.default_rng(123))
    assert set(sim.targets) <= set(mc)
    for target, value in mc.items():
        assert sim.truths[target] == pytest.approx(value, abs=0.01)


@pytest.mark.parametrize("kind", DGP_KINDS)
def test_seed_determinism(kind):
    a = generate(DgpSpec(kind, 200, seed=4))
    b = generate(DgpSpec(kind, 200, seed=4))
    c = generate(DgpSpec(kind, 200, seed=5))
    assert a.dataset == b.dataset and a.dag == b.dag
    assert a.dataset != c.dataset
    assert set(a.dataset.names) == set(a.dag.nodes)
    a.dataset.check_types(dict(a.dag.var_types))


def test_exogenous_moments():
    n = 5000
    tol = 4 / np.sqrt(n)
    z = generate(DgpSpec("linear_confounder", n, seed=1)).dataset["Z"]
    assert abs(z.mean()) < tol and abs(z.std() - 1) < tol
    d = generate(DgpSpec("poly_mediation", n, seed=1)).dataset
    u = d["X2"] - 0.5 * d["X1"]
    assert u.min() >= -10 and u.max() <= 10
    assert abs(u.mean()) < 20 / np.sqrt(12) * tol
    d = generate(DgpSpec("complex_linear", n, seed=1)).dataset
    for name in ("Z1", "Z3", "Z12"):
        assert abs(d[name].mean()) < tol and abs(d[name].std() - 1) < tol


def test_poly_linear_limit_has_zero_direct_coefficient():
    d = generate(DgpSpec("poly_mediation", 5000, seed=2,
                         params={"lambda2": 0.0, "lambda3": 0.0})).dataset
    A = np.column_stack([np.ones(5000), d["X1"], d["X2"]])
    beta = np.linalg.lstsq(A, d["Y"], rcond=None)[0]
    assert abs(beta[1]) < 0.1
    assert beta[2] == pytest.approx(0.5, abs=0.02)


def test_dgp_spec_errors():
    with pytest.raises(ConfigError):
        DgpSpec("quadratic", 100)
    with pytest.raises(ConfigError):
        DgpSpec("linear_confounder", 5)
    with pytest.raises(ConfigError):
        DgpSpec("linear_confounder", 100, params={"lambda1": 1})
    assert DgpSpec("poly_mediation", 100).params == {"lambda1": 0.5, "lambda2": 0.1,
                                                      "lambda3": 0.1}


def test_default_lambda_grid():
    assert len(DEFAULT_LAMBDA_GRID) == 10
    assert DEFAULT_LAMBDA_GRID[0] == 0 and DEFAULT_LAMBDA_GRID[-1] == pytest.approx(0.1)


# ------------------------------------------------------------ protocols

LIGHT = [LearnerSpec("LR"), LearnerSpec("GB", {"n_rounds": 20})]


def test_run_comparison_small(tmp_path):
    res = run_comparison("partial_mediation", [50], 1, seed=3, k=3, learners=LIGHT, threads=1)
    assert len(res.rows) == 6  # 3 targets x 2 methods
    cell = res.summary["results"]["total"]["slem"]["50"]
    assert cell["reps"] == 1 and cell["mean_abs_error"] == cell["median_abs_error"]
    path = tmp_path / "c.csv"
    res.write_csv(path)
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["dgp", "target", "method", "n", "rep", "estimate", "abs_error"]
    assert float(rows[0]["abs_error"]) == res.rows[0]["abs_error"]
    res.write_json(tmp_path / "c.json")
    assert json.loads((tmp_path / "c.json").read_text()) == res.summary


def test_run_comparison_deterministic_across_threads():
    a = run_comparison("linear_confounder", [60, 80], 2, seed=1, k=3, learners=LIGHT, threads=1)
    b = run_comparison("linear_confounder", [60, 80], 2, seed=1, k=3, learners=LIGHT, threads=2)
    assert a.rows == b.rows


def test_baseline_is_exact_on_linear_confounder():
    # baseline path regression on the linear DGP is unbiased; one big replicate
    res = run_comparison("linear_confounder", [20000], 1, methods=["baseline"], seed=0, k=2)
    assert res.mean_mae("baseline", 20000) < 0.05


def test_run_comparison_errors():
    with pytest.raises(ConfigError):
        run_comparison("linear_confounder", [50], 0)
    with pytest.raises(ConfigError):
        run_comparison("linear_confounder", [], 1)
    with pytest.raises(ConfigError):
        run_comparison("linear_confounder", [50], 1, methods=["sem"])


def test_lambda_sweep_small():
    table = lambda_sweep(n=400, lambda_grid=[0.0, 0.1], reps=2, seed=0, k=3, learners=LIGHT,
                         threads=1)
    assert [r["lambda"] for r in table] == [0.0, 0.1]
    for r in table:
        assert len(r["slem"]) == 2 and r["slem_mean"] == pytest.approx(np.mean(r["slem"]))
    assert abs(table[0]["linear_mean"]) < 0.3
    with pytest.raises(ConfigError):
        lambda_sweep(n=100, reps=0)
