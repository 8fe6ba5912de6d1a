"""TF-IDF document vectors with a count-thresholded vocabulary."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    document_frequency: np.ndarray
    n_docs: int

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + self.document_frequency)) + 1.0


def fit_tfidf(train_docs: Iterable[Sequence[str]], min_count: int = 5) -> TfidfModel:
    """Vocabulary = tokens occurring more than ``min_count`` times in training docs."""
    docs = [list(d) for d in train_docs]
    totals = Counter()
    df = Counter()
    for d in docs:
        totals.update(d)
        df.update(set(d))
    vocab_tokens = sorted(tok for tok, c in totals.items() if c > min_count)
    vocabulary = {tok: i for i, tok in enumerate(vocab_tokens)}
    return TfidfModel(
        vocabulary=vocabulary,
        document_frequency=np.array([df[tok] for tok in vocab_tokens], dtype=float),
        n_docs=len(docs),
    )


def transform(model: TfidfModel | None, docs: Iterable[Sequence[str]]) -> sparse.csr_matrix:
    """Raw-count tf times smoothed idf, each row L2-normalized."""
    if model is None:
        raise RuntimeError("transform called before fit_tfidf")
    idf = model.idf
    indptr, indices, data = [0], [], []
    for doc in docs:
        counts = Counter(model.vocabulary[t] for t in doc if t in model.vocabulary)
        cols = sorted(counts)
        vals = np.array([counts[c] * idf[c] for c in cols], dtype=float)
        norm = math.sqrt(float(np.dot(vals, vals)))
        if norm > 0:
            vals /= norm
        indices.extend(cols)
        data.extend(vals.tolist())
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(indptr) - 1, len(model.vocabulary)),
    )
