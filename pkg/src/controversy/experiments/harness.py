"""Cross-validated evaluation, observation-window sweeps and the popularity null."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..learn import Hyperparameters, accuracy, decision_scores, default_grid, grid_search
from .dataset import COMMENT_FAMILIES, Dataset, Featurizer, parse_feature_spec, spec_name
from .significance import combined_p
from .splits import FoldSplit

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = tuple(range(15, 181, 15))


@dataclass
class EvalReport:
    config: str
    t: float | None
    accuracies: tuple[float, ...]
    n_train: int
    n_test: int
    baseline: str | None = None
    p_value: float | None = None
    p_wilcoxon: float | None = None
    p_ttest: float | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def stderr(self) -> float:
        a = np.asarray(self.accuracies)
        return float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0

    def compare_to(self, baseline: "EvalReport") -> "EvalReport":
        diffs = np.asarray(self.accuracies) - np.asarray(baseline.accuracies)
        self.baseline = baseline.config
        self.p_value, self.p_wilcoxon, self.p_ttest = combined_p(diffs, self.n_train, self.n_test)
        return self

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "t": self.t,
            "mean": self.mean,
            "stderr": self.stderr,
            "accuracies": list(self.accuracies),
            "baseline": self.baseline,
            "p_value": self.p_value,
            "p_wilcoxon": self.p_wilcoxon,
            "p_ttest": self.p_ttest,
        }


def _fold_data(featurizer: Featurizer, dataset: Dataset, split: FoldSplit):
    featurizer.fit(dataset, split.train)
    return (featurizer.transform(dataset, split.train),
            featurizer.transform(dataset, split.dev),
            featurizer.transform(dataset, split.test))


def run_config(dataset: Dataset, feature_spec, t: float | None, splits: Sequence[FoldSplit],
               grid: Sequence[Hyperparameters] | None = None, seed: int = 0,
               labels: np.ndarray | None = None, **featurizer_kw) -> EvalReport:
    """Per fold: fit featurizers on train, select on dev, score on test."""
    families = parse_feature_spec(feature_spec)
    grid = default_grid() if grid is None else list(grid)
    y = dataset.labels if labels is None else np.asarray(labels)
    accs = []
    for split in splits:
        featurizer = Featurizer(families, t, **featurizer_kw)
        X_tr, X_dev, X_te = _fold_data(featurizer, dataset, split)
        best = grid_search(X_tr, y[split.train], X_dev, y[split.dev], grid, seed)
        accs.append(accuracy(best.model, X_te, y[split.test]))
    n_train, _, n_test = splits[0].sizes
    return EvalReport(spec_name(families), t, tuple(accs), n_train, n_test)


def first_significant_t(reports: Iterable[EvalReport], alpha: float) -> float | None:
    for rep in sorted(reports, key=lambda r: r.t):
        if rep.p_value is not None and rep.p_value < alpha:
            return rep.t
    return None


@dataclass
class SweepResult:
    baseline: EvalReport
    reports: list[EvalReport]
    t_s: dict[str, float | None]
    t_s_strict: dict[str, float | None] = field(default_factory=dict)
    alpha: float = 0.05
    alpha_strict: float = 0.01

    def rows(self) -> list[dict]:
        return [r.to_dict() for r in sorted(self.reports, key=lambda r: (r.config, r.t))]


def time_sweep(dataset: Dataset, feature_specs: Sequence, splits: Sequence[FoldSplit],
               baseline="TEXT+TIME", t_grid: Sequence[float] = DEFAULT_T_GRID, alpha: float = 0.05,
               alpha_strict: float = 0.01, grid=None, seed: int = 0, **featurizer_kw) -> SweepResult:
    """Accuracy of each spec at each window, tested against the post-time baseline.

    ``t_s`` is the smallest window where the spec beats the baseline with
    p < alpha (None if it never does).
    """
    base_fams = parse_feature_spec(baseline)
    if any(f in COMMENT_FAMILIES for f in base_fams):
        raise ValueError("the baseline must use post-time features only")
    base = run_config(dataset, base_fams, None, splits, grid, seed, **featurizer_kw)
    reports = []
    for spec in feature_specs:
        fams = parse_feature_spec(spec)
        post_only = not any(f in COMMENT_FAMILIES for f in fams)
        cached = base if fams == base_fams else None
        for t in t_grid:
            if cached is None or not post_only:
                rep = run_config(dataset, fams, None if post_only else t, splits, grid, seed, **featurizer_kw)
                if post_only:
                    cached = rep
            else:
                rep = cached
            rep = EvalReport(rep.config, t, rep.accuracies, rep.n_train, rep.n_test).compare_to(base)
            reports.append(rep)
            logger.info("%s t=%s acc=%.4f p=%.3g", rep.config, t, rep.mean, rep.p_value)
    t_s, t_s_strict = {}, {}
    for spec in feature_specs:
        name = spec_name(parse_feature_spec(spec))
        mine = [r for r in reports if r.config == name]
        t_s[name] = first_significant_t(mine, alpha)
        t_s_strict[name] = first_significant_t(mine, alpha_strict)
    return SweepResult(base, reports, t_s, t_s_strict, alpha, alpha_strict)


def popularity_labels(dataset: Dataset) -> np.ndarray:
    """1 when eventual comments reach the dataset median (ties count as above)."""
    counts = dataset.eventual_comments()
    return (counts >= np.median(counts)).astype(int)


def _top_half(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(-scores, kind="stable")
    out = np.zeros(scores.size, dtype=int)
    out[order[: scores.size // 2]] = 1
    return out


@dataclass
class PopularityNullResult:
    predictor: EvalReport
    oracle: EvalReport

    def to_dict(self) -> dict:
        return {"pop_predictor": self.predictor.to_dict(), "pop_oracle": self.oracle.to_dict()}


def popularity_null(dataset: Dataset, feature_spec, splits: Sequence[FoldSplit], t: float = 180,
                    grid=None, seed: int = 0, pop_labels: np.ndarray | None = None,
                    **featurizer_kw) -> PopularityNullResult:
    """Score popularity predictors (and a popularity oracle) on controversy labels.

    The predictor is trained on popularity labels and forced to call exactly
    half of each test set popular. Which popularity value maps to
    "controversial" is read off the training split.
    """
    families = parse_feature_spec(feature_spec)
    grid = default_grid() if grid is None else list(grid)
    y = dataset.labels
    pop = popularity_labels(dataset) if pop_labels is None else np.asarray(pop_labels)
    pred_accs, oracle_accs = [], []
    for split in splits:
        featurizer = Featurizer(families, t if any(f in COMMENT_FAMILIES for f in families) else None,
                                **featurizer_kw)
        X_tr, X_dev, X_te = _fold_data(featurizer, dataset, split)
        best = grid_search(X_tr, pop[split.train], X_dev, pop[split.dev], grid, seed)
        pop_pred = _top_half(decision_scores(best.model, X_te))
        same = np.mean(pop[split.train] == y[split.train]) >= 0.5

        def to_controversy(p):
            return p if same else 1 - p

        y_te = y[split.test]
        pred_accs.append(float(np.mean(to_controversy(pop_pred) == y_te)))
        oracle_accs.append(float(np.mean(to_controversy(pop[split.test]) == y_te)))
    n_train, _, n_test = splits[0].sizes
    name = spec_name(families)
    return PopularityNullResult(
        EvalReport(f"pop_pred[{name}]", t, tuple(pred_accs), n_train, n_test),
        EvalReport("pop_oracle", t, tuple(oracle_accs), n_train, n_test),
    )
