import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagsl.errors import NonFiniteError, ShapeMismatchError, TooFewRowsError
from dagsl.learners import LearnerSpec, Task
from dagsl.superlearner import (
    fit_super_learner,
    make_folds,
    simplex_objective,
    sl_predict,
    solve_simplex_weights,
)

REG = Task("regression")
LIGHT = [LearnerSpec("LR"), LearnerSpec("GB", {"n_rounds": 20}), LearnerSpec("BR")]


def grid_oracle(Z, y, step):
    """Best objective over a dense grid of the 1- or 2-simplex."""
    K = Z.shape[1]
    g = np.arange(0.0, 1.0 + step / 2, step)
    if K == 2:
        W = np.c_[g, 1 - g]
    else:
        a, b = np.meshgrid(g, g)
        keep = a + b <= 1 + 1e-12
        W = np.c_[a[keep], b[keep], np.clip(1 - a[keep] - b[keep], 0, None)]
    obj = ((Z @ W.T - y[:, None]) ** 2).mean(axis=0)
    return obj.min()


# ------------------------------------------------------------ simplex solver

def test_identical_columns_split_evenly():
    y = np.random.default_rng(0).standard_normal(50)
    np.testing.assert_allclose(solve_simplex_weights(np.c_[y, y], y), [0.5, 0.5], atol=1e-12)


def test_opposite_column_gets_no_weight():
    y = np.random.default_rng(1).standard_normal(50)
    np.testing.assert_allclose(solve_simplex_weights(np.c_[y, -y], y), [1, 0], atol=1e-6)


def test_doubled_and_zero_columns_against_grid():
    # 0.5 * (2y) + 0.5 * 0 reproduces y exactly, so w = [0.5, 0.5]
    y = np.random.default_rng(2).standard_normal(80)
    Z = np.c_[2 * y, np.zeros(80)]
    w = solve_simplex_weights(Z, y)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-6)
    assert simplex_objective(Z, y, w) <= grid_oracle(Z, y, 1e-4) + 1e-6


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 3))
def test_solver_matches_dense_grid(seed, K):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(100)
    Z = y[:, None] * rng.uniform(-1, 2, K) + rng.standard_normal((100, K)) * rng.uniform(0, 2, K)
    w = solve_simplex_weights(Z, y)
    assert np.all(w >= 0) and abs(w.sum() - 1) < 1e-12
    step = 1e-4 if K == 2 else 2.5e-3
    assert simplex_objective(Z, y, w) <= grid_oracle(Z, y, step) + 1e-6


def test_solver_scale_free():
    rng = np.random.default_rng(3)
    y = rng.standard_normal(60)
    Z = np.c_[y + rng.standard_normal(60), 0.5 * y, rng.standard_normal(60)]
    np.testing.assert_allclose(solve_simplex_weights(Z * 1e6, y * 1e6),
                               solve_simplex_weights(Z, y), atol=1e-8)


def test_solver_input_errors():
    with pytest.raises(ShapeMismatchError):
        solve_simplex_weights(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(NonFiniteError):
        solve_simplex_weights(np.array([[np.inf, 0.0]]), np.zeros(1))


def test_single_column():
    y = np.arange(5.0)
    np.testing.assert_array_equal(solve_simplex_weights(y[:, None] * 3, y), [1.0])


# ---------------------------------------------------------------- folds

@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(0, 1000), st.integers(10, 80))
def test_folds_partition_rows(k, seed, n):
    n = max(n, k)
    fold, _ = make_folds(np.zeros(n), k, np.random.default_rng(seed), stratify=False)
    counts = np.bincount(fold, minlength=k)
    assert counts.sum() == n and counts.max() - counts.min() <= 1


def test_stratified_folds_balance_classes():
    y = np.r_[np.zeros(60), np.ones(24)]
    fold, strat = make_folds(y, 6, np.random.default_rng(0), stratify=True)
    assert strat
    for f in range(6):
        assert np.sum(y[fold == f] == 1) == 4


def test_rare_class_disables_stratification():
    y = np.r_[np.zeros(60), np.ones(3)]
    _, strat = make_folds(y, 6, np.random.default_rng(0), stratify=True)
    assert not strat


# ------------------------------------------------------------ super learner

def linear_data(n=300, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    return X, X @ [1.0, -2.0] + 0.5


def test_single_candidate_weight_one():
    X, y = linear_data()
    sl = fit_super_learner(X, y, REG, k=3, specs=["LR"])
    np.testing.assert_array_equal(sl.weights, [1.0])


def test_level_one_covers_every_row_once():
    X, y = linear_data(101)
    sl = fit_super_learner(X, y, REG, k=6, specs=LIGHT)
    assert sl.level_one.shape == (101, 3)
    assert np.all(np.isfinite(sl.level_one))
    assert sorted(np.bincount(sl.folds)) == [16, 17, 17, 17, 17, 17]
    # the LR column equals an explicit refit on each fold's complement
    for f in range(6):
        tr = sl.folds != f
        beta = np.linalg.lstsq(np.c_[np.ones(tr.sum()), X[tr]], y[tr], rcond=None)[0]
        np.testing.assert_allclose(sl.level_one[~tr, 0], np.c_[np.ones((~tr).sum()), X[~tr]] @ beta,
                                   atol=1e-6)


def test_perfect_candidate_dominates_noise():
    X, y = linear_data(200)
    rng = np.random.default_rng(7)
    Z = np.c_[y, rng.standard_normal(200) * y.std() + y.mean()]
    assert solve_simplex_weights(Z, y)[0] >= 0.99
    sl = fit_super_learner(X, y, REG, k=5, specs=["LR", LearnerSpec("GB", {"n_rounds": 5})])
    assert sl.weights[0] >= 0.99


def test_determinism_of_weights():
    X, y = linear_data(150, seed=3)
    y = y + np.random.default_rng(0).standard_normal(150)
    a = fit_super_learner(X, y, REG, k=4, specs=LIGHT, seed=5)
    b = fit_super_learner(X, y, REG, k=4, specs=LIGHT, seed=5)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_classification_super_learner():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((240, 2))
    y = np.digitize(X[:, 0] + 0.3 * rng.standard_normal(240), [-0.5, 0.5]).astype(float)
    task = Task("multiclass", 3)
    sl = fit_super_learner(X, y, task, k=4, specs=LIGHT, seed=1)
    assert sl.stratified
    assert sl.level_one.shape == (240, 3, 3)
    P = sl_predict(sl, X)
    np.testing.assert_allclose(P.sum(1), 1, atol=1e-9)
    assert sl.cv_risks["ensemble"] <= min(sl.cv_risks[s.name] for s in sl.specs) * 1.05


def test_sl_predict_is_weighted_sum():
    X, y = linear_data(120, seed=2)
    y = y + np.random.default_rng(1).standard_normal(120)
    sl = fit_super_learner(X, y, REG, k=3, specs=["LR", LearnerSpec("GB", {"n_rounds": 10})])
    from dagsl.learners import predict
    p1, p2 = (predict(m, X) for m in sl.models)
    manual = object.__new__(type(sl))
    object.__setattr__(manual, "__dict__", dict(sl.__dict__))
    object.__setattr__(manual, "weights", np.array([0.3, 0.7]))
    np.testing.assert_allclose(sl_predict(manual, X), 0.3 * p1 + 0.7 * p2, rtol=0, atol=1e-12)
    object.__setattr__(manual, "weights", np.array([1.0, 0.0]))
    np.testing.assert_array_equal(sl_predict(manual, X), p1)


def test_equal_candidates_give_that_prediction():
    X, y = linear_data(90)
    sl = fit_super_learner(X, y, REG, k=3, specs=["LR", "Poly"])
    # noise-free linear data: both candidates reproduce y, so any mixture does
    np.testing.assert_allclose(sl_predict(sl, X), y, atol=1e-4)


def test_too_few_rows():
    with pytest.raises(TooFewRowsError):
        fit_super_learner(np.zeros((3, 1)), np.arange(3.0), REG, k=6, specs=["LR"])
    with pytest.raises(TooFewRowsError):
        fit_super_learner(np.zeros((9, 1)), np.arange(9.0), REG, k=1, specs=["LR"])


def test_predict_shape_mismatch():
    X, y = linear_data(60)
    sl = fit_super_learner(X, y, REG, k=3, specs=["LR"])
    with pytest.raises(ShapeMismatchError):
        sl_predict(sl, X[:, :1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["regression", "binary", "multiclass"]))
def test_weights_on_simplex(seed, kind):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((60, 2))
    if kind == "regression":
        task, y = Task(kind), X[:, 0] + rng.standard_normal(60)
    elif kind == "binary":
        task, y = Task(kind), (X[:, 0] + rng.standard_normal(60) > 0).astype(float)
    else:
        task, y = Task(kind, 3), rng.integers(0, 3, 60).astype(float)
    sl = fit_super_learner(X, y, task, k=3, specs=LIGHT, seed=seed)
    assert np.all(sl.weights >= 0) and abs(sl.weights.sum() - 1) <= 1e-9
