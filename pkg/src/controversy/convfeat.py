"""Early-conversation features: C-RATE, C-TREE and C-TEXT.

Every function here expects a tree already pruned to the observation
window. Undefined features come back as NaN; imputation happens later, with
training-split column means.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable, Mapping

import numpy as np

from .corpus import CommentTree, prune_to_window

NAN = float("nan")


@dataclass(frozen=True)
class RateFeatures:
    n_comments: int
    log_first_reply_gap: float
    mean_log_parent_child_gap: float


@dataclass(frozen=True)
class TreeFeatures:
    max_depth_ratio: float
    prop_top_level: float
    avg_depth: float
    avg_branching: float
    prop_top_level_replied: float
    gini_top_level_replies: float
    wiener_index: float


RATE_COLUMNS = tuple(f.name for f in fields(RateFeatures))
TREE_COLUMNS = tuple(f.name for f in fields(TreeFeatures))


def _log_gap_minutes(seconds: float) -> float:
    # child-before-parent timestamps are clamped to a zero gap
    return math.log1p(max(seconds, 0.0) / 60.0)


def rate_features(tree: CommentTree) -> RateFeatures:
    n = tree.n_comments
    if n == 0:
        return RateFeatures(0, NAN, NAN)
    post = tree.post
    top = tree.children.get(post.id, ())
    first = min(tree.comments[c].created for c in top)
    gaps = []
    for c in tree.comments.values():
        parent_created = post.created if c.parent_id == post.id else tree.comments[c.parent_id].created
        gaps.append(_log_gap_minutes(c.created - parent_created))
    return RateFeatures(n, _log_gap_minutes(first - post.created), math.fsum(gaps) / len(gaps))


def gini(values: Iterable[float]) -> float:
    """Gini coefficient, sum_ij |x_i - x_j| / (2 n^2 mean)."""
    x = np.sort(np.asarray(list(values), dtype=float))
    if x.size == 0:
        raise ValueError("gini of an empty sequence is undefined")
    if np.any(x < 0):
        raise ValueError("gini requires nonnegative values")
    n = x.size
    total = x.sum()
    if n == 1 or total == 0:
        return 0.0
    # sorted-rank identity for the pairwise absolute-difference sum
    ranks = np.arange(1, n + 1)
    return float(np.dot(2 * ranks - n - 1, x) / (n * total))


def wiener_index(tree: CommentTree) -> float:
    """Mean hop distance over all unordered node pairs, post included.

    Each edge lies on s * (N - s) shortest paths, where s is the size of the
    subtree below it.
    """
    order = tree.node_ids()
    n_nodes = len(order)
    if n_nodes < 2:
        return 0.0
    size = {nid: 1 for nid in order}
    total = 0
    for nid in reversed(order[1:]):
        s = size[nid]
        total += s * (n_nodes - s)
        size[tree.parent_of(nid)] += s
    return total / (n_nodes * (n_nodes - 1) / 2)


def tree_features(tree: CommentTree, gini_mode: str = "children") -> TreeFeatures:
    """Structural features of the pruned reply tree.

    ``gini_mode`` picks what counts as the replies to a top-level comment:
    ``"children"`` (direct replies, the default) or ``"subtree"`` (every
    descendant).
    """
    n = tree.n_comments
    if n == 0:
        return TreeFeatures(*([NAN] * len(TREE_COLUMNS)))
    depths = list(tree.depth.values())
    top = tree.children.get(tree.post.id, ())
    n_top = len(top)
    if gini_mode == "children":
        replies = [len(tree.children.get(c, ())) for c in top]
    elif gini_mode == "subtree":
        replies = [_subtree_size(tree, c) - 1 for c in top]
    else:
        raise ValueError(f"unknown gini_mode {gini_mode!r}")
    return TreeFeatures(
        max_depth_ratio=max(depths) / n,
        prop_top_level=n_top / n,
        avg_depth=sum(depths) / n,
        # edges / nodes: every comment is one child edge, post counted as a node
        avg_branching=n / (n + 1),
        prop_top_level_replied=sum(1 for c in top if tree.children.get(c)) / n_top,
        gini_top_level_replies=gini(replies),
        wiener_index=wiener_index(tree),
    )


def _subtree_size(tree: CommentTree, root: str) -> int:
    stack, count = [root], 0
    while stack:
        nid = stack.pop()
        count += 1
        stack.extend(tree.children.get(nid, ()))
    return count


def ctext_features(
    tree: CommentTree,
    embedding_source: Mapping[str, np.ndarray] | Callable[[object], np.ndarray | None],
) -> np.ndarray | None:
    """Mean of the available comment vectors; None when there are none.

    ``embedding_source`` is either a mapping from comment id to vector or a
    callable taking a Comment. Deleted-body comments are skipped.
    """
    vectors = []
    for c in tree.comments.values():
        if c.body_deleted:
            continue
        if callable(embedding_source):
            v = embedding_source(c)
        else:
            v = embedding_source.get(c.id)
        if v is None:
            continue
        v = np.asarray(v, dtype=float)
        if vectors and v.shape != vectors[0].shape:
            raise ValueError(
                f"comment {c.id} has vector shape {v.shape}, expected {vectors[0].shape}"
            )
        vectors.append(v)
    if not vectors:
        return None
    return np.mean(np.vstack(vectors), axis=0)


def conversation_row(tree: CommentTree, t: float, gini_mode: str = "children") -> dict:
    pruned = prune_to_window(tree, t)
    row = {"post_id": tree.post.id, "t": t}
    row.update(asdict(rate_features(pruned)))
    row.update(asdict(tree_features(pruned, gini_mode)))
    return row


def write_conversation_csv(trees: Iterable[CommentTree], t_values: Iterable[float], path) -> None:
    """One row per (post, t); header is post_id, t, then the feature names."""
    t_values = list(t_values)
    header = ["post_id", "t", *RATE_COLUMNS, *TREE_COLUMNS]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        for tree in trees:
            for t in t_values:
                row = conversation_row(tree, t)
                w.writerow({k: ("" if isinstance(v, float) and math.isnan(v) else v)
                            for k, v in row.items()})
