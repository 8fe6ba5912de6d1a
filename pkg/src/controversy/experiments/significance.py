"""Paired significance tests over cross-validation folds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

EXACT_MAX_N = 20


def _signed_ranks(diffs: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(diffs, dtype=float)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))  # average ranks for ties
    return d, ranks


def _exact_null_distribution(doubled_ranks: np.ndarray) -> np.ndarray:
    """counts[s] = number of sign patterns whose positive doubled-rank sum is s."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks.astype(int):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r else counts
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(diffs: Sequence[float]) -> float:
    """Two-sided p-value; zeros dropped, ties get average ranks.

    Exact (all 2^n sign flips, via a rank-sum convolution) for n <= 20,
    normal approximation with continuity and tie corrections above.
    """
    d, ranks = _signed_ranks(diffs)
    n = d.size
    if n == 0:
        return 1.0
    w_plus = ranks[d > 0].sum()
    mean = n * (n + 1) / 4.0
    if n <= EXACT_MAX_N:
        # average ranks are multiples of 1/2, so doubling makes them integral
        doubled = np.rint(2 * ranks).astype(int)
        counts = _exact_null_distribution(doubled)
        sums = np.arange(counts.size)
        dev = abs(2 * w_plus - 2 * mean)
        extreme = np.abs(sums - 2 * mean) >= dev - 1e-9
        return float(min(1.0, counts[extreme].sum() / counts.sum()))
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - (tie_counts ** 3 - tie_counts).sum() / 48.0
    if var <= 0:
        return 1.0
    z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
    return float(min(1.0, 2 * stats.norm.sf(max(z, 0.0))))


@dataclass(frozen=True)
class TTestResult:
    p: float
    t: float
    degenerate: bool = False


def corrected_resampled_t_full(diffs: Sequence[float], n_train: int, n_test: int) -> TTestResult:
    d = np.asarray(diffs, dtype=float)
    k = d.size
    if k < 2:
        raise ValueError("need at least two paired differences")
    mean = d.mean()
    var = d.var(ddof=1)
    if var <= 0:
        if mean == 0:
            return TTestResult(1.0, 0.0, True)
        return TTestResult(0.0, math.copysign(math.inf, mean), True)
    t = mean / math.sqrt((1.0 / k + n_test / n_train) * var)
    return TTestResult(float(2 * stats.t.sf(abs(t), k - 1)), float(t))


def corrected_resampled_t(diffs: Sequence[float], n_train: int, n_test: int) -> float:
    """Two-sided p of the variance-corrected paired t over k CV folds.

    The variance term (1/k + n_test/n_train) s^2 accounts for overlap
    between the folds' training sets.
    """
    return corrected_resampled_t_full(diffs, n_train, n_test).p


def combined_p(diffs: Sequence[float], n_train: int, n_test: int) -> tuple[float, float, float]:
    """(max, wilcoxon, corrected t) p-values for one vector of differences."""
    p_w = wilcoxon_signed_rank(diffs)
    p_t = corrected_resampled_t(diffs, n_train, n_test)
    return max(p_w, p_t), p_w, p_t


def significance(acc_a: Sequence[float], acc_b: Sequence[float],
                 n_train: int = 3, n_test: int = 1) -> float:
    """Conservative p: the larger of the Wilcoxon and corrected-t p-values.

    ``n_train``/``n_test`` only matter through their ratio (1/3 for 60/20/20).
    """
    a = np.asarray(getattr(acc_a, "accuracies", acc_a), dtype=float)
    b = np.asarray(getattr(acc_b, "accuracies", acc_b), dtype=float)
    if a.shape != b.shape:
        raise ValueError("reports must have the same number of paired folds")
    return combined_p(a - b, n_train, n_test)[0]
