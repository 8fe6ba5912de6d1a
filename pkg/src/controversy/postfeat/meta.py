"""Post-time metadata indicators: TIME and AUTHOR."""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable

import numpy as np


def _utc(created: float) -> datetime:
    return datetime.fromtimestamp(created, tz=timezone.utc)


@dataclass(frozen=True)
class TimeEncoder:
    first_year: int
    last_year: int

    @property
    def n_years(self) -> int:
        return self.last_year - self.first_year + 1

    @property
    def columns(self) -> list[str]:
        return ([f"year_{y}" for y in range(self.first_year, self.last_year + 1)]
                + [f"month_{m}" for m in range(1, 13)]
                + [f"dow_{d}" for d in range(7)]
                + [f"hour_{h}" for h in range(24)])

    def transform(self, created: float) -> np.ndarray:
        when = _utc(created)
        out = np.zeros(self.n_years + 12 + 7 + 24)
        # years outside the training range snap to the nearest trained year
        year = min(max(when.year, self.first_year), self.last_year)
        out[year - self.first_year] = 1
        base = self.n_years
        out[base + when.month - 1] = 1
        out[base + 12 + when.weekday()] = 1
        out[base + 19 + when.hour] = 1
        return out


def fit_time(train_created: Iterable[float]) -> TimeEncoder:
    years = [_utc(c).year for c in train_created]
    if not years:
        raise ValueError("cannot fit time indicators on an empty training set")
    return TimeEncoder(min(years), max(years))


def time_features(created: float, encoder: TimeEncoder) -> np.ndarray:
    return encoder.transform(created)


@dataclass(frozen=True)
class AuthorEncoder:
    authors: tuple[str, ...]

    @property
    def columns(self) -> list[str]:
        return [f"author_{a}" for a in self.authors]

    def transform(self, author: str | None) -> np.ndarray:
        out = np.zeros(len(self.authors))
        if author is not None:
            i = _bisect(self.authors, author)
            if i is not None:
                out[i] = 1
        return out


def _bisect(items: tuple[str, ...], key: str) -> int | None:
    i = bisect.bisect_left(items, key)
    return i if i < len(items) and items[i] == key else None


def fit_authors(train_authors: Iterable[str | None], min_count: int = 3) -> AuthorEncoder:
    counts = Counter(a for a in train_authors if a is not None)
    return AuthorEncoder(tuple(sorted(a for a, c in counts.items() if c >= min_count)))


def author_features(author: str | None, train_author_counts: Counter | dict, min_count: int = 3) -> np.ndarray:
    """One-hot over training authors with at least ``min_count`` posts."""
    qualifying = tuple(sorted(a for a, c in train_author_counts.items() if c >= min_count))
    return AuthorEncoder(qualifying).transform(author)
