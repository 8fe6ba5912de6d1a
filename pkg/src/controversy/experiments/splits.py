from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TRAIN_FRAC = 0.6
DEV_FRAC = 0.2


@dataclass(frozen=True)
class FoldSplit:
    fold: int
    train: np.ndarray
    dev: np.ndarray
    test: np.ndarray

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.dev), len(self.test)


def make_splits(row_ids: Sequence, labels: Sequence[int], folds: int = 15, seed: int = 0) -> list[FoldSplit]:
    """Stratified random 60/20/20 splits, one independent shuffle per fold.

    Splits hold row positions (indices into ``row_ids``), sorted ascending.
    """
    labels = np.asarray(labels)
    if len(row_ids) != labels.size:
        raise ValueError("row_ids and labels differ in length")
    classes = np.unique(labels)
    per_class = {c: np.flatnonzero(labels == c) for c in classes}
    for c, idx in per_class.items():
        if idx.size < 10:
            raise ValueError(f"class {c!r} has {idx.size} rows; need at least 10")
    out = []
    for f in range(folds):
        rng = np.random.default_rng([seed, f])
        parts = {"train": [], "dev": [], "test": []}
        for c in classes:
            idx = rng.permutation(per_class[c])
            n_train = int(round(TRAIN_FRAC * idx.size))
            n_dev = int(round(DEV_FRAC * idx.size))
            parts["train"].append(idx[:n_train])
            parts["dev"].append(idx[n_train:n_train + n_dev])
            parts["test"].append(idx[n_train + n_dev:])
        out.append(FoldSplit(f, *(np.sort(np.concatenate(parts[k])) for k in ("train", "dev", "test"))))
    return out
