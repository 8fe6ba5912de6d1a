"""Small builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from controversy.corpus import Comment, Post, build_trees

T0 = 1_400_000_000.0


def make_post(pid="p", created=T0, n_comments=50, pupv=(0.8,) * 10, scores=(10, 11), author="alice",
              title="a title", body="some body text") -> Post:
    return Post(pid, "sub", author, created, title, body, n_comments, tuple(pupv), tuple(scores))


def tree_from_parents(parents, minutes=None, pid="p", deleted=()):
    """Tree whose comment k hangs off ``parents[k]`` (-1 = the post)."""
    n = len(parents)
    minutes = list(range(1, n + 1)) if minutes is None else list(minutes)
    post = make_post(pid)
    ids = [f"{pid}c{k}" for k in range(n)]
    comments = [
        Comment(ids[k], pid, pid if parents[k] < 0 else ids[parents[k]], None, T0 + 60.0 * minutes[k],
                "" if k in deleted else f"text {k}", k in deleted)
        for k in range(n)
    ]
    return build_trees([post], comments).trees[0]


def random_parents(rng: np.random.Generator, n: int) -> list[int]:
    """Uniform random recursive tree: comment k picks a parent among earlier nodes."""
    return [int(rng.integers(-1, k)) if k > 0 else -1 for k in range(n)]
