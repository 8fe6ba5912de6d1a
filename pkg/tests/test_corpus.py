import io
import json

import numpy as np
import pytest

from controversy.corpus import (
    Comment,
    build_trees,
    comment_to_json,
    parse_dump,
    post_to_json,
    prune_to_window,
    read_dump,
    DumpError,
)
from helpers import T0, make_post, random_parents, tree_from_parents


def _line(**kw):
    return json.dumps(kw)


COMMENT = dict(id="c1", link_id="t3_p", parent_id="t3_p", created_utc=T0 + 5, body="hi", author="bob")
POST = dict(id="p", subreddit="s", author="a", created_utc=T0, title="t", selftext="b", num_comments=40,
            upvote_ratio=[0.7, 0.71], score=[3, 4])


def test_parse_comment_line():
    res = parse_dump([_line(**COMMENT)], "comments")
    (c,) = res.records
    assert c == Comment("c1", "p", "p", "bob", T0 + 5, "hi", False)
    assert res.n_skipped == 0


def test_deleted_body_sets_flag():
    res = parse_dump([_line(**{**COMMENT, "body": "[deleted]"}), _line(**{**COMMENT, "id": "c2", "body": "[removed]"})],
                     "comments")
    assert all(c.body_deleted and c.body == "" for c in res.records)


def test_missing_created_is_skipped():
    bad = dict(COMMENT)
    del bad["created_utc"]
    res = parse_dump([_line(**bad), _line(**{**COMMENT, "id": "c2"})], "comments")
    assert len(res.records) == 1
    assert res.skipped == [(1, "missing field created_utc")]


def test_malformed_lines_never_abort():
    lines = ["{not json", "[1, 2]", _line(**{**POST, "upvote_ratio": 1.5}), _line(**{**POST, "created_utc": 0}),
             _line(**POST), _line(**POST), ""]
    res = parse_dump(lines, "posts")
    assert len(res.records) == 1
    assert [ln for ln, _ in res.skipped] == [1, 2, 3, 4, 6]
    assert res.skipped[-1][1] == "duplicate id"


def test_scalar_vote_fields_become_single_samples():
    res = parse_dump([_line(**{**POST, "upvote_ratio": 0.9, "score": 7})], "posts")
    assert res.records[0].pupv_samples == (0.9,) and res.records[0].score_samples == (7,)


def test_unknown_kind_is_fatal():
    with pytest.raises(ValueError):
        parse_dump([], "votes")


def test_unreadable_stream_is_fatal(tmp_path):
    with pytest.raises(DumpError):
        read_dump(tmp_path / "nope.jsonl", "posts")
    p = tmp_path / "bin.jsonl"
    p.write_bytes(b"\xff\xfe\x00garbage")
    with pytest.raises(DumpError):
        read_dump(p, "posts")


def test_json_round_trip():
    post = make_post(pupv=(0.6, 0.7), scores=(1, 2))
    c = Comment("c1", "p", "p", None, T0 + 1, "", True)
    assert parse_dump([json.dumps(post_to_json(post))], "posts").records == [post]
    assert parse_dump(io.StringIO(json.dumps(comment_to_json(c)) + "\n"), "comments").records == [c]


def test_depths_and_orphans():
    tree = tree_from_parents([-1, 0, 1])
    assert [tree.depth[f"pc{k}"] for k in range(3)] == [1, 2, 3]
    post = make_post()
    comments = [Comment("a", "p", "p", None, T0 + 1, "x"), Comment("b", "p", "ghost", None, T0 + 2, "x"),
                Comment("c", "p", "b", None, T0 + 3, "x")]
    res = build_trees([post], comments)
    assert sorted(res.orphans) == ["b", "c"]
    assert list(res.trees[0].comments) == ["a"]


def test_cycles_are_dropped():
    post = make_post()
    comments = [Comment("a", "p", "b", None, T0 + 1, "x"), Comment("b", "p", "a", None, T0 + 2, "x"),
                Comment("c", "p", "a", None, T0 + 3, "x"), Comment("d", "p", "p", None, T0 + 4, "x")]
    res = build_trees([post], comments)
    assert sorted(res.cycles) == ["a", "b", "c"]
    assert list(res.trees[0].comments) == ["d"]


def test_flatten_returns_each_non_orphan_once():
    rng = np.random.default_rng(0)
    tree = tree_from_parents(random_parents(rng, 80))
    ids = [c.id for c in tree.iter_comments()]
    assert sorted(ids) == sorted(tree.comments) and len(set(ids)) == 80
    for cid, d in tree.depth.items():
        parent = tree.parent_of(cid)
        assert d == (1 if parent == "p" else tree.depth[parent] + 1)


def test_window_boundaries():
    tree = tree_from_parents([-1, 0, -1], minutes=[0.5, 60, 61])
    assert prune_to_window(tree, 0).n_comments == 0
    assert set(prune_to_window(tree, 60).comments) == {"pc0", "pc1"}  # closed interval
    with pytest.raises(ValueError):
        prune_to_window(tree, -1)


def test_window_matches_linear_scan_and_is_monotone():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 60))
        minutes = np.sort(rng.exponential(50, n))
        tree = tree_from_parents(random_parents(rng, n), minutes)
        cutoff = T0 + 3600
        expected = {c.id for c in tree.comments.values() if c.created <= cutoff}
        assert set(prune_to_window(tree, 60).comments) == expected
        assert set(prune_to_window(tree, 30).comments) <= set(prune_to_window(tree, 45).comments)


def test_window_drops_descendants_of_late_parents():
    # child stamped before its parent: kept only if the parent is kept
    tree = tree_from_parents([-1, 0], minutes=[90, 10])
    assert prune_to_window(tree, 30).n_comments == 0
