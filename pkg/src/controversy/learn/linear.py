"""Regularized linear classifiers and dev-set hyperparameter selection.

Objectives are written per training row:

* logistic:  mean log-loss + strength * ((1 - r)/2 ||w||^2 + r ||w||_1),
  with r = 0 (L2), 1 (L1) or 0.5 (elastic); the intercept is unpenalized.
* svm:       mean hinge loss + strength/2 * ||(w, b)||^2, solved in the dual
  by coordinate descent (the intercept rides along as a constant feature)
  until the relative duality gap drops below TOL.

Labels are 0/1 on the way in and out; 1 is the positive class.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numba
import numpy as np
from scipy import optimize, special

from .matrix import FeatureMatrix, Preprocessor, fit_preprocessor

MODEL_TYPES = ("logistic_l2", "logistic_l1", "logistic_elastic", "svm")
L1_RATIO = {"logistic_l2": 0.0, "logistic_l1": 1.0, "logistic_elastic": 0.5}
DEFAULT_STRENGTHS = tuple(10.0 ** k for k in (-100, -5, -4, -3, -2, -1, 0, 1))

TOL = 1e-6
MAX_ITER = 10_000


@dataclass(frozen=True)
class Hyperparameters:
    model_type: str
    strength: float
    standardize: bool = False

    def __post_init__(self):
        if self.model_type not in MODEL_TYPES:
            raise ValueError(f"unknown model type {self.model_type!r}")
        if not self.strength >= 0:
            raise ValueError("regularization strength must be nonnegative")


def make_grid(strengths: Iterable[float] = DEFAULT_STRENGTHS,
              model_types: Iterable[str] = MODEL_TYPES,
              standardize: Iterable[bool] = (False, True)) -> list[Hyperparameters]:
    return [Hyperparameters(m, s, z)
            for z, m, s in itertools.product(standardize, model_types, strengths)]


def default_grid() -> list[Hyperparameters]:
    return make_grid()


@dataclass(frozen=True)
class ModelArtifact:
    columns: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    preprocessor: Preprocessor
    hyperparameters: Hyperparameters
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "columns": list(self.columns),
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "preprocessor": self.preprocessor.to_dict(),
            "hyperparameters": asdict(self.hyperparameters),
            "seed": self.seed,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelArtifact":
        d = json.loads(text)
        return cls(tuple(d["columns"]), np.array(d["weights"], dtype=float), float(d["intercept"]),
                   Preprocessor.from_dict(d["preprocessor"]), Hyperparameters(**d["hyperparameters"]),
                   int(d["seed"]))


# --- logistic family ---------------------------------------------------------

def _logistic_objective(w, b, X, ys, strength, l1_ratio):
    z = X @ w + b
    loss = np.logaddexp(0.0, -ys * z).mean()
    return loss + strength * ((1 - l1_ratio) / 2 * np.dot(w, w) + l1_ratio * np.abs(w).sum())


def _fit_logistic(X: np.ndarray, ys: np.ndarray, strength: float, l1_ratio: float):
    n, d = X.shape
    l2 = strength * (1 - l1_ratio)
    l1 = strength * l1_ratio
    opts = {"maxiter": MAX_ITER, "ftol": TOL, "gtol": 1e-10, "maxls": 50}

    if l1_ratio == 0.0:
        def fun(theta):
            w, b = theta[:d], theta[d]
            z = X @ w + b
            g = -ys * special.expit(-ys * z) / n
            f = np.logaddexp(0.0, -ys * z).mean() + l2 / 2 * np.dot(w, w)
            return f, np.concatenate([X.T @ g + l2 * w, [g.sum()]])

        res = optimize.minimize(fun, np.zeros(d + 1), jac=True, method="L-BFGS-B", options=opts)
        return res.x[:d].copy(), float(res.x[d])

    # w = w_pos - w_neg with both halves bounded below by 0 makes the L1 term smooth
    def fun(theta):
        wp, wn, b = theta[:d], theta[d:2 * d], theta[2 * d]
        w = wp - wn
        z = X @ w + b
        g = -ys * special.expit(-ys * z) / n
        f = np.logaddexp(0.0, -ys * z).mean() + l2 / 2 * np.dot(w, w) + l1 * (wp.sum() + wn.sum())
        gw = X.T @ g + l2 * w
        return f, np.concatenate([gw + l1, -gw + l1, [g.sum()]])

    bounds = [(0.0, None)] * (2 * d) + [(None, None)]
    res = optimize.minimize(fun, np.zeros(2 * d + 1), jac=True, method="L-BFGS-B",
                            bounds=bounds, options=opts)
    w = res.x[:d] - res.x[d:2 * d]
    return w, float(res.x[2 * d])


# --- hinge loss --------------------------------------------------------------

@numba.njit(cache=True)
def _svm_dual_cd(X, ys, upper, seed, max_epochs, tol):
    n, d = X.shape
    np.random.seed(seed)
    alpha = np.zeros(n)
    w = np.zeros(d)
    qd = np.empty(n)
    for i in range(n):
        qd[i] = np.dot(X[i], X[i])
    order = np.arange(n)
    for _ in range(max_epochs):
        for k in range(n - 1, 0, -1):  # in-place Fisher-Yates
            j = np.random.randint(0, k + 1)
            order[k], order[j] = order[j], order[k]
        for k in range(n):
            i = order[k]
            if qd[i] <= 0.0:
                continue
            g = 0.0
            for c in range(d):
                g += w[c] * X[i, c]
            g = ys[i] * g - 1.0
            a_new = min(max(alpha[i] - g / qd[i], 0.0), upper)
            step = a_new - alpha[i]
            if step != 0.0:
                alpha[i] = a_new
                step *= ys[i]
                for c in range(d):
                    w[c] += step * X[i, c]
        # relative duality gap bounds the primal suboptimality
        ww = np.dot(w, w)
        hinge = 0.0
        for i in range(n):
            m = 0.0
            for c in range(d):
                m += w[c] * X[i, c]
            m = 1.0 - ys[i] * m
            if m > 0.0:
                hinge += m
        primal = 0.5 * ww + upper * hinge
        dual = alpha.sum() - 0.5 * ww
        if primal - dual <= tol * max(abs(primal), 1e-300):
            break
    return w


def _fit_svm(X: np.ndarray, ys: np.ndarray, strength: float, seed: int):
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    # strength/2 ||w||^2 + mean hinge  <=>  1/2 ||w||^2 + C sum hinge,  C = 1/(strength n)
    upper = 1.0 / (max(strength, 1e-300) * n)
    w = _svm_dual_cd(np.ascontiguousarray(Xa), ys.astype(np.float64), min(upper, 1e300),
                     seed, MAX_ITER, TOL)
    return w[:d].copy(), float(w[d])


# --- public API --------------------------------------------------------------

def _as_signed(y) -> np.ndarray:
    y = np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("training labels contain a single class")
    if not set(classes.tolist()) <= {0, 1}:
        raise ValueError("labels must be 0/1")
    return np.where(y == 1, 1.0, -1.0)


def train_linear(X: FeatureMatrix, y, hyperparameters: Hyperparameters, seed: int = 0,
                 preprocessor: Preprocessor | None = None) -> ModelArtifact:
    """Fit one linear model; the preprocessor is fit on ``X`` unless given."""
    ys = _as_signed(y)
    hp = hyperparameters
    if preprocessor is None:
        preprocessor = fit_preprocessor(X, hp.standardize)
    elif preprocessor.standardize != hp.standardize:
        raise ValueError("preprocessor standardization does not match hyperparameters")
    dense = preprocessor.apply(X)
    if hp.model_type == "svm":
        w, b = _fit_svm(dense, ys, hp.strength, seed)
    else:
        w, b = _fit_logistic(dense, ys, hp.strength, L1_RATIO[hp.model_type])
    return ModelArtifact(X.columns, w, b, preprocessor, hp, seed)


def decision_scores(model: ModelArtifact, X: FeatureMatrix) -> np.ndarray:
    if X.columns != model.columns:
        raise ValueError("feature columns do not match the model")
    return model.preprocessor.apply(X) @ model.weights + model.intercept


def predict(model: ModelArtifact, X: FeatureMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Scores w.x + b and 0/1 labels; a score of exactly 0 is the negative class."""
    scores = decision_scores(model, X)
    return scores, (scores > 0).astype(int)


def accuracy(model: ModelArtifact, X: FeatureMatrix, y) -> float:
    _, labels = predict(model, X)
    return float(np.mean(labels == np.asarray(y)))


def objective(model: ModelArtifact, X: FeatureMatrix, y) -> float:
    """Training objective of ``model`` on (X, y), in per-row units."""
    ys = _as_signed(y)
    dense = model.preprocessor.apply(X)
    hp = model.hyperparameters
    if hp.model_type == "svm":
        z = dense @ model.weights + model.intercept
        reg = np.dot(model.weights, model.weights) + model.intercept ** 2
        return float(np.maximum(0.0, 1 - ys * z).mean() + hp.strength / 2 * reg)
    return float(_logistic_objective(model.weights, model.intercept, dense, ys,
                                     hp.strength, L1_RATIO[hp.model_type]))


def _tie_key(hp: Hyperparameters):
    return (-hp.strength, MODEL_TYPES.index(hp.model_type), hp.standardize)


@dataclass(frozen=True)
class GridResult:
    model: ModelArtifact
    dev_accuracy: float
    table: tuple[tuple[Hyperparameters, float], ...]


def grid_search(train: FeatureMatrix, y_train, dev: FeatureMatrix, y_dev,
                grid: Sequence[Hyperparameters], seed: int = 0) -> GridResult:
    """Train every grid point on ``train`` and keep the best dev accuracy.

    Ties go to stronger regularization, then model type in MODEL_TYPES order,
    then unstandardized features.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    preprocessors = {z: fit_preprocessor(train, z) for z in sorted({hp.standardize for hp in grid})}
    y_dev = np.asarray(y_dev)
    results = []
    for hp in grid:
        model = train_linear(train, y_train, hp, seed, preprocessors[hp.standardize])
        results.append((hp, accuracy(model, dev, y_dev), model))
    best = min(results, key=lambda r: (-r[1], _tie_key(r[0])))
    return GridResult(best[2], best[1], tuple((hp, acc) for hp, acc, _ in results))
