import math

import numpy as np
import pytest
from scipy import stats

from controversy.learn import (
    FeatureMatrix,
    Hyperparameters,
    ModelArtifact,
    accuracy,
    fit_logistic_mle,
    fit_preprocessor,
    grid_search,
    likelihood_ratio_test,
    logistic_loglik,
    make_grid,
    nested_lr_test,
    objective,
    default_grid,
    predict,
    train_linear,
)


def fm(values, prefix="r"):
    values = np.asarray(values, dtype=float)
    return FeatureMatrix.from_array([f"{prefix}{i}" for i in range(len(values))],
                                    [f"f{j}" for j in range(values.shape[1])], values)


def noisy_problem(seed=0, n=200, d=3, signal=1.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    w = np.zeros(d)
    w[0] = signal
    y = (rng.random(n) < 1 / (1 + np.exp(-(X @ w)))).astype(int)
    return X, y


# --- preprocessing ---------------------------------------------------------------

def test_imputation_uses_training_means():
    train = fm([[1.0], [np.nan], [3.0]])
    pre = fit_preprocessor(train, standardize=False)
    assert pre.apply(train)[:, 0].tolist() == [1.0, 2.0, 3.0]
    test = fm([[np.nan], [10.0]], "t")
    assert pre.apply(test)[:, 0].tolist() == [2.0, 10.0]


def test_standardization_and_degenerate_columns(caplog):
    rng = np.random.default_rng(0)
    vals = np.column_stack([rng.normal(5, 3, 50), np.full(50, 7.0), np.full(50, np.nan)])
    pre = fit_preprocessor(fm(vals), standardize=True)
    out = pre.apply(fm(vals))
    assert np.all(np.abs(out[:, 0:1].mean(axis=0)) < 1e-9)
    assert abs(out[:, 0].var() - 1) < 1e-6
    assert np.all(out[:, 1] == 0) and np.all(out[:, 2] == 0)
    assert "all-missing" in caplog.text
    with pytest.raises(ValueError):
        pre.apply(fm(vals[:, :2]))


# --- training --------------------------------------------------------------------

@pytest.mark.parametrize("model_type", ["logistic_l2", "logistic_l1", "logistic_elastic", "svm"])
def test_separable_toy(model_type):
    X = fm([[0, 0], [0, 1], [1, 0], [3, 3], [3, 4], [4, 3]])
    y = [0, 0, 0, 1, 1, 1]
    model = train_linear(X, y, Hyperparameters(model_type, 1e-4))
    assert accuracy(model, X, y) == 1.0
    assert predict(model, X)[1].tolist() == y


def test_tiny_strength_matches_unpenalized_fit():
    X, y = noisy_problem(1, n=120)
    w_ref, b_ref, ll_ref = fit_logistic_mle(X, y)
    ref_objective = -ll_ref / len(y)
    for mt in ("logistic_l2", "logistic_l1", "logistic_elastic"):
        model = train_linear(fm(X), y, Hyperparameters(mt, 1e-100))
        assert abs(objective(model, fm(X), y) - ref_objective) < 1e-6, mt


def test_strong_l1_zeroes_noise_weights():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 5))
    y = (rng.random(300) < 0.5).astype(int)
    model = train_linear(fm(X), y, Hyperparameters("logistic_l1", 1.0))
    assert np.all(model.weights == 0.0)


def test_svm_is_a_local_minimum():
    X, y = noisy_problem(3, n=150)
    for strength in (1e-3, 1e-1):
        model = train_linear(fm(X), y, Hyperparameters("svm", strength))
        base = objective(model, fm(X), y)
        rng = np.random.default_rng(0)
        for _ in range(200):
            dw = rng.normal(scale=1e-3, size=model.weights.size)
            db = rng.normal(scale=1e-3)
            moved = ModelArtifact(model.columns, model.weights + dw, model.intercept + db,
                                  model.preprocessor, model.hyperparameters)
            assert objective(moved, fm(X), y) >= base - 1e-6


def test_training_is_deterministic_and_round_trips():
    X, y = noisy_problem(4)
    for mt in ("svm", "logistic_elastic"):
        hp = Hyperparameters(mt, 1e-2, True)
        a = train_linear(fm(X), y, hp, seed=5)
        b = train_linear(fm(X), y, hp, seed=5)
        assert a.to_json() == b.to_json()
        back = ModelArtifact.from_json(a.to_json())
        assert back.to_json() == a.to_json()
        assert np.array_equal(predict(back, fm(X))[0], predict(a, fm(X))[0])


def test_single_class_and_bad_hyperparameters():
    with pytest.raises(ValueError):
        train_linear(fm([[1.0], [2.0]]), [1, 1], Hyperparameters("svm", 1.0))
    with pytest.raises(ValueError):
        Hyperparameters("ridge", 1.0)
    with pytest.raises(ValueError):
        Hyperparameters("svm", -1.0)


def test_predict_scores_and_ties():
    X, y = noisy_problem(5, n=30)
    model = train_linear(fm(X), y, Hyperparameters("logistic_l2", 1e-2))
    dense = model.preprocessor.apply(fm(X))
    naive = [sum(dense[i, j] * model.weights[j] for j in range(dense.shape[1])) + model.intercept
             for i in range(len(dense))]
    assert np.allclose(predict(model, fm(X))[0], naive, atol=1e-12)
    zero = ModelArtifact(model.columns, np.zeros(3), 0.0, model.preprocessor, model.hyperparameters)
    scores, labels = predict(zero, fm(X))
    assert np.all(scores == 0) and np.all(labels == 0)
    with pytest.raises(ValueError):
        predict(model, fm(X[:, :2]))


# --- grid search -----------------------------------------------------------------

def test_default_grid_shape():
    grid = default_grid()
    assert len(grid) == 8 * 4 * 2
    assert {hp.strength for hp in grid} == {10.0 ** k for k in (-100, -5, -4, -3, -2, -1, 0, 1)}


def test_grid_of_one_and_best_dev():
    X, y = noisy_problem(6, n=200, signal=3.0)
    tr, dv = fm(X[:120]), fm(X[120:], "d")
    hp = Hyperparameters("logistic_l2", 1e-3)
    res = grid_search(tr, y[:120], dv, y[120:], [hp])
    assert res.model.hyperparameters == hp
    # a crushing penalty predicts one class; the mild one must win
    res = grid_search(tr, y[:120], dv, y[120:], [Hyperparameters("logistic_l1", 10.0), hp])
    assert res.model.hyperparameters == hp
    assert res.dev_accuracy == max(acc for _, acc in res.table)


def test_grid_tie_rules():
    # constant features: every model predicts a single class, so all dev accuracies tie
    X = fm(np.zeros((40, 1)))
    y = np.array([0, 1] * 20)
    grid = make_grid([1e-3, 1.0], ["svm", "logistic_l1", "logistic_l2"], [True, False])
    winners = {grid_search(X, y, X, y, grid).model.hyperparameters for _ in range(2)}
    assert winners == {Hyperparameters("logistic_l2", 1.0, False)}


# --- likelihood-ratio test ---------------------------------------------------------

def test_lr_test_reference_values():
    assert likelihood_ratio_test(-10.0, -10.0, 1) == 1.0
    assert likelihood_ratio_test(0.0, 3.841 / 2, 1) == pytest.approx(0.05, abs=1e-4)
    assert likelihood_ratio_test(0.0, 3.841 / 2, 1) == pytest.approx(stats.chi2.sf(3.841, 1), abs=1e-15)
    assert likelihood_ratio_test(-5.0, -5.0 - 1e-8, 2) == 1.0
    with pytest.raises(ValueError):
        likelihood_ratio_test(-5.0, -6.0, 1)


def test_loglik_hand_value():
    # two rows at z = 0 give log(1/2) each
    assert logistic_loglik([0.0], 0.0, [[1.0], [2.0]], [0, 1]) == pytest.approx(2 * math.log(0.5))


def test_lr_test_planted_and_null():
    X, y = noisy_problem(7, n=400, d=2, signal=1.5)
    assert nested_lr_test(X[:, 1:], X, y) < 0.01
    assert nested_lr_test(X[:, :1], X, y) > 1e-3  # column 1 carries no signal
