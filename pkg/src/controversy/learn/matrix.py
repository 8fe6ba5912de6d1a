from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureMatrix:
    """Named-column matrix; ``mask`` marks missing cells (stored as NaN)."""

    row_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.row_ids), len(self.columns)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.row_ids)} rows x {len(self.columns)} columns"
            )
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")

    @classmethod
    def from_array(cls, row_ids: Sequence[str], columns: Sequence[str], values) -> "FeatureMatrix":
        values = np.asarray(values, dtype=float).reshape(len(row_ids), len(columns))
        return cls(tuple(row_ids), tuple(columns), values, np.isnan(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def take(self, rows: Sequence[int]) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(tuple(self.row_ids[i] for i in rows), self.columns,
                             self.values[rows], self.mask[rows])

    def select(self, columns: Sequence[str]) -> "FeatureMatrix":
        pos = [self.columns.index(c) for c in columns]
        return FeatureMatrix(self.row_ids, tuple(columns), self.values[:, pos], self.mask[:, pos])

    @staticmethod
    def hstack(parts: Sequence["FeatureMatrix"]) -> "FeatureMatrix":
        if not parts:
            raise ValueError("nothing to stack")
        rows = parts[0].row_ids
        for p in parts[1:]:
            if p.row_ids != rows:
                raise ValueError("row ids differ between stacked blocks")
        return FeatureMatrix(
            rows,
            tuple(c for p in parts for c in p.columns),
            np.hstack([p.values for p in parts]),
            np.hstack([p.mask for p in parts]),
        )


@dataclass(frozen=True)
class Preprocessor:
    columns: tuple[str, ...]
    impute_means: np.ndarray
    standardize: bool
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X: FeatureMatrix) -> np.ndarray:
        if X.columns != self.columns:
            raise ValueError("feature columns do not match the fitted preprocessor")
        out = np.where(X.mask, self.impute_means, X.values)
        if self.standardize:
            out = (out - self.mean) / self.scale
        return out

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "impute_means": self.impute_means.tolist(),
            "standardize": self.standardize,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessor":
        return cls(tuple(d["columns"]), np.array(d["impute_means"], dtype=float), bool(d["standardize"]),
                   np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float))


def fit_preprocessor(train: FeatureMatrix, standardize: bool) -> Preprocessor:
    """Training-split column means for imputation, plus optional scaling."""
    present = ~train.mask
    counts = present.sum(axis=0)
    sums = np.where(present, train.values, 0.0).sum(axis=0)
    empty = counts == 0
    if empty.any():
        logger.warning("imputing all-missing training columns with 0: %s",
                       [c for c, e in zip(train.columns, empty) if e])
    means = np.where(empty, 0.0, sums / np.maximum(counts, 1))
    filled = np.where(train.mask, means, train.values)
    mean = filled.mean(axis=0) if len(filled) else np.zeros(len(train.columns))
    std = filled.std(axis=0) if len(filled) else np.ones(len(train.columns))
    # zero-variance columns are only centered
    scale = np.where(std > 1e-12, std, 1.0)
    return Preprocessor(train.columns, means, standardize, mean, scale)


def apply(preprocessor: Preprocessor, X: FeatureMatrix) -> np.ndarray:
    return preprocessor.apply(X)
