"""Pooled embedding representations: mean pooling, SIF (ARORA) and PCA."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    index: Mapping[str, int]
    matrix: np.ndarray
    source: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __len__(self) -> int:
        return len(self.index)

    def get(self, token: str) -> np.ndarray | None:
        i = self.index.get(token)
        return None if i is None else self.matrix[i]

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]], source: str = "") -> "EmbeddingTable":
        tokens = list(vectors)
        matrix = np.array([vectors[t] for t in tokens], dtype=float)
        if matrix.ndim != 2:
            raise EmbeddingFormatError("vectors must share one dimension")
        return cls({t: i for i, t in enumerate(tokens)}, matrix, source)


def load_embeddings(path) -> EmbeddingTable:
    """Read ``<count> <dim>`` followed by ``token v1 ... v_dim`` lines."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            count, dim = int(header[0]), int(header[1])
        except (IndexError, ValueError):
            raise EmbeddingFormatError(f"{path}:1: header must be '<count> <dim>'") from None
        index: dict[str, int] = {}
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected token plus {dim} values, got {len(parts) - 1}"
                )
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric vector value") from None
            index[parts[0]] = len(rows) - 1
    if len(rows) != count:
        raise EmbeddingFormatError(f"{path}: header declares {count} vectors, found {len(rows)}")
    matrix = np.array(rows, dtype=float).reshape(len(rows), dim)
    return EmbeddingTable(index, matrix, source=path.name)


def write_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for token, i in table.index.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in table.matrix[i]) + "\n")


def load_doc_vectors(path) -> dict[str, np.ndarray]:
    """Precomputed document vectors: CSV rows of ``id, v1, ..., v_d``."""
    out = {}
    dim = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                vec = np.array([float(v) for v in row[1:]], dtype=float)
            except ValueError:
                if lineno == 1:  # header row
                    continue
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric vector value") from None
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected {dim} values, got {vec.size}")
            out[row[0]] = vec
    return out


def embed_doc(tokens: Sequence[str], table: EmbeddingTable, max_tokens: int = 512) -> np.ndarray | None:
    """Mean of the first ``max_tokens`` in-table token vectors, L2-normalized."""
    idx = [table.index[t] for t in tokens if t in table.index][:max_tokens]
    if not idx:
        return None
    v = table.matrix[idx].mean(axis=0)
    norm = np.linalg.norm(v)
    if norm == 0:
        return None
    return v / norm


def word_frequencies(train_docs: Iterable[Sequence[str]]) -> dict[str, float]:
    counts = Counter()
    for d in train_docs:
        counts.update(d)
    total = sum(counts.values())
    return {w: c / total for w, c in counts.items()} if total else {}


def sif_embed(tokens: Sequence[str], table: EmbeddingTable, word_freqs: Mapping[str, float],
              a: float = 1e-3) -> np.ndarray | None:
    """Smooth-inverse-frequency weighted mean, weights a / (a + p(w))."""
    matched = [t for t in tokens if t in table.index]
    if not matched:
        return None
    weights = np.array([a / (a + word_freqs.get(t, 0.0)) for t in matched])
    vecs = table.matrix[[table.index[t] for t in matched]]
    return weights @ vecs / len(matched)


@dataclass(frozen=True)
class SIFModel:
    word_freqs: Mapping[str, float]
    a: float
    direction: np.ndarray | None

    def transform(self, tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray | None:
        v = sif_embed(tokens, table, self.word_freqs, self.a)
        if v is None or self.direction is None:
            return v
        return v - self.direction * np.dot(self.direction, v)


def fit_sif(train_docs: Sequence[Sequence[str]], table: EmbeddingTable, a: float = 1e-3) -> SIFModel:
    """Estimate word frequencies and the common direction on training docs only."""
    freqs = word_frequencies(train_docs)
    vecs = [v for v in (sif_embed(d, table, freqs, a) for d in train_docs) if v is not None]
    direction = None
    if vecs:
        _, _, vt = np.linalg.svd(np.vstack(vecs), full_matrices=False)
        direction = vt[0]
    return SIFModel(freqs, a, direction)


@dataclass(frozen=True)
class PCAProjection:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) @ self.components.T


def pca_fit(train_matrix: np.ndarray, d_out: int = 100) -> PCAProjection:
    """Top ``d_out`` principal directions of the centered training matrix.

    Each direction is signed so its largest-magnitude coordinate is positive.
    """
    X = np.asarray(train_matrix, dtype=float)
    n, d = X.shape
    if d_out > d:
        raise ValueError(f"d_out={d_out} exceeds feature count {d}")
    if d_out > n:
        raise ValueError(f"d_out={d_out} exceeds sample count {n}")
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = vt[:d_out]
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(d_out), pivots])
    signs[signs == 0] = 1.0
    comps = comps * signs[:, None]
    var = s[:d_out] ** 2 / max(n - 1, 1)
    return PCAProjection(mean, comps, var)


def pca_apply(projection: PCAProjection, vector: np.ndarray) -> np.ndarray:
    return projection.apply(vector)
