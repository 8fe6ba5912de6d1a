from .linear import (
    DEFAULT_STRENGTHS,
    MODEL_TYPES,
    GridResult,
    Hyperparameters,
    ModelArtifact,
    accuracy,
    decision_scores,
    default_grid,
    grid_search,
    make_grid,
    objective,
    predict,
    train_linear,
)
from .lrtest import fit_logistic_mle, likelihood_ratio_test, logistic_loglik, nested_lr_test
from .matrix import FeatureMatrix, Preprocessor, apply, fit_preprocessor

__all__ = [
    "DEFAULT_STRENGTHS", "MODEL_TYPES", "FeatureMatrix", "GridResult", "Hyperparameters",
    "ModelArtifact", "Preprocessor", "accuracy", "apply", "decision_scores", "default_grid",
    "fit_logistic_mle",
    "fit_preprocessor", "grid_search", "likelihood_ratio_test", "logistic_loglik", "make_grid",
    "nested_lr_test", "objective", "predict", "train_linear",
]
