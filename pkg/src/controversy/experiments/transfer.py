"""Cross-community transfer: train on one dataset, test on another."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..learn import accuracy, default_grid, grid_search
from .dataset import COMMENT_FAMILIES, Dataset, Featurizer, parse_feature_spec, spec_name
from .splits import FoldSplit


def transfer_degradation(acc_transfer: float, acc_matched: float, baseline: float = 0.5) -> float:
    """Relative loss of above-baseline accuracy; NaN when matched <= baseline."""
    if not acc_matched > baseline:
        return math.nan
    return (acc_transfer - baseline) / (acc_matched - baseline) - 1.0


@dataclass
class TransferResult:
    names: list[str]
    config: str
    t: float | None
    accuracy: np.ndarray       # [train, test], mean over folds
    degradation: np.ndarray    # [train, test]

    def rows(self) -> list[dict]:
        out = []
        for i, src in enumerate(self.names):
            for j, dst in enumerate(self.names):
                out.append({
                    "config": self.config, "t": self.t, "train": src, "test": dst,
                    "accuracy": float(self.accuracy[i, j]),
                    "degradation": float(self.degradation[i, j]),
                })
        return out


def transfer_matrix(datasets: Sequence[Dataset], feature_spec, t: float | None,
                    splits: Sequence[Sequence[FoldSplit]], grid=None, seed: int = 0,
                    **featurizer_kw) -> TransferResult:
    """Accuracy of every (train community, test community) pair.

    Models are fit and selected on the source's train/dev rows of fold f and
    scored on the target's fold-f test rows. Column j is normalized by the
    matched accuracy on the diagonal.
    """
    if len(datasets) < 2:
        raise ValueError("transfer needs at least two datasets")
    families = parse_feature_spec(feature_spec)
    if "TIME" in families or "AUTHOR" in families:
        raise ValueError("posting-time features (TIME, AUTHOR) are excluded from transfer runs")
    dims = {ds.vector_dim for ds in datasets if ds.vector_dim is not None}
    if len(dims) > 1:
        raise ValueError(f"datasets disagree on embedding dimension: {sorted(dims)}")
    if len(splits) != len(datasets):
        raise ValueError("one split list per dataset required")
    n_folds = min(len(s) for s in splits)
    grid = default_grid() if grid is None else list(grid)
    t_eff = t if any(f in COMMENT_FAMILIES for f in families) else None

    k = len(datasets)
    acc = np.zeros((k, k))
    for i, src in enumerate(datasets):
        for f in range(n_folds):
            split = splits[i][f]
            featurizer = Featurizer(families, t_eff, **featurizer_kw).fit(src, split.train)
            best = grid_search(featurizer.transform(src, split.train), src.labels[split.train],
                               featurizer.transform(src, split.dev), src.labels[split.dev], grid, seed)
            for j, dst in enumerate(datasets):
                test = splits[j][f].test
                acc[i, j] += accuracy(best.model, featurizer.transform(dst, test), dst.labels[test])
    acc /= n_folds
    deg = np.array([[transfer_degradation(acc[i, j], acc[j, j]) for j in range(k)] for i in range(k)])
    return TransferResult([d.name for d in datasets], spec_name(families), t, acc, deg)
