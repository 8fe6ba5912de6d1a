import itertools
import math

import numpy as np
import pytest
from scipy import stats

from controversy.experiments.significance import (
    corrected_resampled_t,
    corrected_resampled_t_full,
    significance,
    wilcoxon_signed_rank,
)


def enumerate_wilcoxon(diffs):
    """Two-sided exact p by listing every sign assignment of the ranks."""
    d = [x for x in diffs if x != 0]
    if not d:
        return 1.0
    ranks = stats.rankdata([abs(x) for x in d])
    observed = sum(r for r, x in zip(ranks, d) if x > 0)
    center = sum(ranks) / 2
    hits = total = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        s = sum(r for r, keep in zip(ranks, signs) if keep)
        hits += abs(s - center) >= abs(observed - center) - 1e-9
        total += 1
    return hits / total


def nadeau_bengio(diffs, n_train, n_test):
    k = len(diffs)
    mean = sum(diffs) / k
    var = sum((x - mean) ** 2 for x in diffs) / (k - 1)
    t = mean / math.sqrt((1 / k + n_test / n_train) * var)
    return 2 * (1 - stats.t.cdf(abs(t), k - 1)), t


def test_wilcoxon_all_positive():
    assert wilcoxon_signed_rank([0.01 * (i + 1) for i in range(15)]) == pytest.approx(2 / 2 ** 15, rel=1e-12)


def test_wilcoxon_symmetry_and_zeros():
    assert wilcoxon_signed_rank([0.1, -0.1, 0.2, -0.2]) == 1.0
    assert wilcoxon_signed_rank([0, 0, 0]) == 1.0
    d = [0.03, -0.01, 0.02, 0.05, 0.0, 0.04]
    assert wilcoxon_signed_rank(d) == wilcoxon_signed_rank([-x for x in d])


def test_wilcoxon_matches_enumeration_with_ties():
    rng = np.random.default_rng(0)
    for _ in range(150):
        n = int(rng.integers(1, 11))
        d = np.round(rng.normal(0.01, 0.03, n), 2).tolist()  # rounding makes ties and zeros
        assert wilcoxon_signed_rank(d) == pytest.approx(enumerate_wilcoxon(d), abs=1e-12)


def test_wilcoxon_normal_branch_close_to_scipy():
    rng = np.random.default_rng(1)
    d = rng.normal(0.01, 0.02, 40)
    ref = stats.wilcoxon(d, method="approx", correction=True).pvalue
    assert wilcoxon_signed_rank(d) == pytest.approx(ref, rel=1e-9)


def test_corrected_t_transcription():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = rng.normal(0.01, 0.03, 15).tolist()
        p_ref, t_ref = nadeau_bengio(d, 3, 1)
        res = corrected_resampled_t_full(d, 3, 1)
        assert res.t == pytest.approx(t_ref, abs=1e-9)
        assert res.p == pytest.approx(p_ref, abs=1e-9)


def test_corrected_t_worked_example_and_degenerate():
    d = np.full(15, 0.02)
    res = corrected_resampled_t_full(d, 60, 20)
    assert res.degenerate and res.p == 0.0
    assert corrected_resampled_t(np.zeros(15), 60, 20) == 1.0
    # mean 0.02 and sample sd 0.03 over 15 folds
    base = np.array([1.0, -1.0] * 7 + [0.0])
    base = (base - base.mean()) / base.std(ddof=1)
    d = 0.02 + 0.03 * base
    t = 0.02 / math.sqrt((1 / 15 + 1 / 3) * 0.0009)
    assert corrected_resampled_t_full(d, 3, 1).t == pytest.approx(t, rel=1e-12)
    assert corrected_resampled_t(d, 3, 1) == pytest.approx(2 * stats.t.sf(t, 14), rel=1e-12)
    with pytest.raises(ValueError):
        corrected_resampled_t([0.1], 3, 1)


def test_significance_is_max():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.uniform(0.5, 0.8, 15)
        b = a + rng.normal(0.01, 0.02, 15)
        d = a - b
        p = significance(a, b)
        assert p == max(wilcoxon_signed_rank(d), corrected_resampled_t(d, 3, 1))
        assert p == pytest.approx(significance(b, a))
    a = rng.uniform(0.5, 0.8, 15)
    assert significance(a, a) == 1.0
