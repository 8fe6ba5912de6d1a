"""Log-odds ratio with an informative Dirichlet prior (fightin' words).

Positive z means the n-gram is over-used in corpus A relative to corpus B.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from typing import Iterable, Sequence

from .text import tokenize


def ngrams(tokens: Sequence[str], ngram_max: int = 3) -> Iterable[str]:
    for n in range(1, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i:i + n])


def count_ngrams(docs: Iterable[str | Sequence[str]], ngram_max: int = 3) -> Counter:
    counts = Counter()
    for doc in docs:
        tokens = tokenize(doc) if isinstance(doc, str) else list(doc)
        counts.update(ngrams(tokens, ngram_max))
    return counts


def fightin_words(corpus_a, corpus_b, ngram_max: int = 3, alpha0: float = 500.0) -> dict[str, float]:
    """z-scored log-odds differences per n-gram.

    The prior puts mass ``alpha0`` on the pooled n-gram distribution.
    """
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    ya = count_ngrams(corpus_a, ngram_max)
    yb = count_ngrams(corpus_b, ngram_max)
    if not ya or not yb:
        raise ValueError("both corpora must contain at least one n-gram")
    na, nb = sum(ya.values()), sum(yb.values())
    pooled = ya + yb
    total = na + nb
    z = {}
    for gram, pooled_count in pooled.items():
        alpha = alpha0 * pooled_count / total
        a_i, b_i = ya.get(gram, 0), yb.get(gram, 0)
        delta = (math.log((a_i + alpha) / (na + alpha0 - a_i - alpha))
                 - math.log((b_i + alpha) / (nb + alpha0 - b_i - alpha)))
        var = 1.0 / (a_i + alpha) + 1.0 / (b_i + alpha)
        z[gram] = delta / math.sqrt(var)
    return z


def write_fightin_csv(z: dict[str, float], path, top: int | None = None) -> None:
    ranked = sorted(z.items(), key=lambda kv: (-kv[1], kv[0]))
    if top is not None:
        ranked = ranked[:top] + ranked[-top:] if len(ranked) > 2 * top else ranked
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ngram", "z"])
        for gram, score in ranked:
            w.writerow([gram, repr(score)])
