import csv
import math
from collections import deque
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from controversy.convfeat import (
    RATE_COLUMNS,
    TREE_COLUMNS,
    ctext_features,
    gini,
    rate_features,
    tree_features,
    wiener_index,
    write_conversation_csv,
)
from controversy.corpus import prune_to_window
from helpers import random_parents, tree_from_parents


# --- independent oracles --------------------------------------------------------

def bfs_wiener(tree):
    nodes = tree.node_ids()
    adj = {n: [] for n in nodes}
    for cid, c in tree.comments.items():
        adj[cid].append(c.parent_id)
        adj[c.parent_id].append(cid)
    total = 0
    for src in nodes:
        dist = {src: 0}
        q = deque([src])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        total += sum(dist.values())
    n = len(nodes)
    return 0.0 if n < 2 else total / 2 / (n * (n - 1) / 2)


def pairwise_gini(xs):
    xs = list(xs)
    n, mean = len(xs), sum(xs) / len(xs)
    if n == 1 or mean == 0:
        return 0.0
    return sum(abs(a - b) for a in xs for b in xs) / (2 * n * n * mean)


def naive_tree_features(tree):
    """Straight traversal without using the tree's cached depth/children maps."""
    parent = {cid: c.parent_id for cid, c in tree.comments.items()}

    def depth(cid):
        d = 0
        while cid != tree.post.id:
            cid = parent[cid]
            d += 1
        return d

    n = len(parent)
    depths = [depth(c) for c in parent]
    top = [c for c in parent if parent[c] == tree.post.id]
    kids = {c: sum(1 for x in parent.values() if x == c) for c in list(parent) + [tree.post.id]}
    return dict(
        max_depth_ratio=max(depths) / n,
        prop_top_level=len(top) / n,
        avg_depth=sum(depths) / n,
        avg_branching=sum(kids.values()) / (n + 1),
        prop_top_level_replied=sum(kids[c] > 0 for c in top) / len(top),
        gini_top_level_replies=pairwise_gini([kids[c] for c in top]),
        wiener_index=bfs_wiener(tree),
    )


# --- rate features ---------------------------------------------------------------

def test_rate_single_pair():
    f = rate_features(tree_from_parents([-1], minutes=[10]))
    assert f.n_comments == 1
    assert f.log_first_reply_gap == pytest.approx(math.log(11), abs=1e-12)
    assert f.mean_log_parent_child_gap == pytest.approx(math.log(11), abs=1e-12)


def test_rate_two_top_level():
    f = rate_features(tree_from_parents([-1, -1], minutes=[10, 20]))
    assert f.mean_log_parent_child_gap == pytest.approx((math.log(11) + math.log(21)) / 2, abs=1e-12)


def test_rate_empty_and_negative_gap():
    f = rate_features(tree_from_parents([]))
    assert f.n_comments == 0 and math.isnan(f.log_first_reply_gap) and math.isnan(f.mean_log_parent_child_gap)
    f = rate_features(tree_from_parents([-1, 0], minutes=[10, 5]))  # reply stamped before its parent
    assert f.mean_log_parent_child_gap == pytest.approx(math.log(11) / 2, abs=1e-12)


def test_rate_matches_pair_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 50))
        minutes = rng.uniform(0, 100, n)
        tree = tree_from_parents(random_parents(rng, n), minutes)
        created = {c.id: c.created for c in tree.comments.values()}
        created[tree.post.id] = tree.post.created
        gaps = [math.log(1 + max(0.0, c.created - created[c.parent_id]) / 60) for c in tree.comments.values()]
        first = min(c.created for c in tree.comments.values() if c.parent_id == tree.post.id)
        f = rate_features(tree)
        assert f.mean_log_parent_child_gap == pytest.approx(sum(gaps) / n, abs=1e-12)
        assert f.log_first_reply_gap == pytest.approx(math.log(1 + (first - tree.post.created) / 60), abs=1e-12)


# --- gini and wiener -------------------------------------------------------------

def test_gini_examples():
    assert gini([2, 2, 2]) == 0
    assert gini([0, 0, 6]) == pytest.approx(2 / 3, abs=1e-12)
    assert gini([0, 0, 6]) == pytest.approx(pairwise_gini([0, 0, 6]), abs=1e-12)
    assert gini([5]) == 0 and gini([0, 0]) == 0
    with pytest.raises(ValueError):
        gini([1, -1])
    with pytest.raises(ValueError):
        gini([])


@given(st.lists(st.integers(0, 50), min_size=1, max_size=30), st.floats(0.1, 100))
@settings(max_examples=200, deadline=None)
def test_gini_properties(xs, c):
    g = gini(xs)
    assert g == pytest.approx(pairwise_gini(xs), abs=1e-9)
    assert g == pytest.approx(gini([c * x for x in xs]), abs=1e-9)
    if sum(xs) > 0:
        assert 0 <= g < 1


def test_wiener_examples():
    assert wiener_index(tree_from_parents([])) == 0
    assert wiener_index(tree_from_parents([-1, 0, 1])) == pytest.approx(5 / 3, abs=1e-12)


@given(st.integers(3, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_wiener_between_star_and_path(n, seed):
    rng = np.random.default_rng(seed)
    tree = tree_from_parents(random_parents(rng, n - 1))
    star = wiener_index(tree_from_parents([-1] * (n - 1)))
    path = wiener_index(tree_from_parents(list(range(-1, n - 2))))
    assert star - 1e-12 <= wiener_index(tree) <= path + 1e-12
    assert wiener_index(tree) == pytest.approx(bfs_wiener(tree), abs=1e-9)


# --- tree features -------------------------------------------------------------

def test_tree_features_star_and_chain():
    f = tree_features(tree_from_parents([-1, -1, -1]))
    assert (f.prop_top_level, f.avg_depth, f.max_depth_ratio, f.prop_top_level_replied, f.avg_branching) == \
        (1, 1, pytest.approx(1 / 3), 0, 0.75)
    f = tree_features(tree_from_parents([-1, 0, 1]))
    assert f.prop_top_level == pytest.approx(1 / 3) and f.avg_depth == 2 and f.max_depth_ratio == 1
    assert all(math.isnan(v) for v in tree_features(tree_from_parents([])).__dict__.values())


def test_tree_features_match_naive_traversal():
    rng = np.random.default_rng(11)
    for _ in range(200):
        tree = tree_from_parents(random_parents(rng, int(rng.integers(1, 80))))
        got = tree_features(tree).__dict__
        for k, v in naive_tree_features(tree).items():
            assert got[k] == pytest.approx(v, abs=1e-9), k
        for k in ("prop_top_level", "prop_top_level_replied", "max_depth_ratio"):
            assert 0 <= got[k] <= 1


def test_gini_subtree_mode():
    # two top-level comments: one with a chain of 2 below it, one bare
    tree = tree_from_parents([-1, -1, 0, 2])
    assert tree_features(tree, "children").gini_top_level_replies == pytest.approx(pairwise_gini([1, 0]))
    assert tree_features(tree, "subtree").gini_top_level_replies == pytest.approx(pairwise_gini([2, 0]))
    with pytest.raises(ValueError):
        tree_features(tree, "weird")


def test_features_are_deterministic():
    rng = np.random.default_rng(0)
    tree = tree_from_parents(random_parents(rng, 40))
    assert repr(tree_features(tree)) == repr(tree_features(tree))
    assert repr(rate_features(tree)) == repr(rate_features(tree))


# --- comment text --------------------------------------------------------------

def test_ctext_mean():
    tree = tree_from_parents([-1, -1, 0], deleted={2})
    v = np.array([1.0, -2.0])
    assert np.array_equal(ctext_features(tree, {"pc0": v}), v)
    out = ctext_features(tree, {"pc0": v, "pc1": -v, "pc2": np.array([9.0, 9.0])})
    assert np.allclose(out, 0)  # the deleted comment is skipped
    assert ctext_features(tree, {}) is None
    with pytest.raises(ValueError):
        ctext_features(tree, {"pc0": v, "pc1": np.ones(3)})


def test_ctext_matches_accumulation():
    rng = np.random.default_rng(2)
    tree = tree_from_parents(random_parents(rng, 25))
    vecs = {cid: rng.normal(size=7) for cid in tree.comments}
    acc = np.zeros(7)
    for cid in tree.comments:
        for j in range(7):
            acc[j] += vecs[cid][j]
    assert np.allclose(ctext_features(tree, lambda c: vecs[c.id]), acc / 25, atol=1e-12)


def test_conversation_csv(tmp_path):
    trees = [tree_from_parents([-1, 0], minutes=[10, 20], pid="a"), tree_from_parents([], pid="b")]
    write_conversation_csv(trees, [15, 30], tmp_path / "f.csv")
    with open(tmp_path / "f.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["post_id", "t", *RATE_COLUMNS, *TREE_COLUMNS]
    assert len(rows) == 4
    assert rows[0]["n_comments"] == "1" and rows[1]["n_comments"] == "2"
    assert rows[2]["wiener_index"] == ""
    assert prune_to_window(trees[0], 15).n_comments == 1
