"""Post/comment dump parsing and comment-tree reconstruction.

Dumps are JSONL in the pushshift layout. Posts carry repeated vote
observations: ``upvote_ratio`` and ``score`` may each be a scalar or a list
of samples.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

logger = logging.getLogger(__name__)

DELETION_SENTINELS = frozenset({"[deleted]", "[removed]"})


@dataclass(frozen=True)
class Post:
    id: str
    subreddit: str
    author: str | None
    created: float
    title: str
    body: str
    num_comments_eventual: int
    pupv_samples: tuple[float, ...]
    score_samples: tuple[int, ...]
    body_deleted: bool = False


@dataclass(frozen=True)
class Comment:
    id: str
    post_id: str
    parent_id: str
    author: str | None
    created: float
    body: str
    body_deleted: bool = False


@dataclass
class ParseResult:
    records: list
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)


class DumpError(Exception):
    """Raised when a dump cannot be read at all."""


def _strip_prefix(name: str) -> str:
    # t1_ = comment, t3_ = link/post
    if len(name) > 3 and name[0] == "t" and name[2] == "_":
        return name[3:]
    return name


def _author(raw) -> str | None:
    if raw is None or raw in DELETION_SENTINELS or raw == "":
        return None
    return str(raw)


def _as_list(value) -> list:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _parse_post(obj: dict) -> Post:
    pid = _strip_prefix(str(obj["id"]))
    created = float(obj["created_utc"])
    if not created > 0:
        raise ValueError("nonpositive created_utc")
    pupv = tuple(float(v) for v in _as_list(obj.get("upvote_ratio")))
    if any(not 0.0 <= v <= 1.0 for v in pupv):
        raise ValueError("upvote_ratio outside [0, 1]")
    scores = tuple(int(v) for v in _as_list(obj.get("score")))
    body = obj.get("selftext") or ""
    return Post(
        id=pid,
        subreddit=str(obj.get("subreddit") or ""),
        author=_author(obj.get("author")),
        created=created,
        title=str(obj.get("title") or ""),
        body="" if body in DELETION_SENTINELS else str(body),
        num_comments_eventual=int(obj.get("num_comments") or 0),
        pupv_samples=pupv,
        score_samples=scores,
        body_deleted=body in DELETION_SENTINELS,
    )


def _parse_comment(obj: dict) -> Comment:
    cid = _strip_prefix(str(obj["id"]))
    created = float(obj["created_utc"])
    if not created > 0:
        raise ValueError("nonpositive created_utc")
    parent = _strip_prefix(str(obj["parent_id"]))
    if parent == cid:
        raise ValueError("comment is its own parent")
    body = obj.get("body")
    body = "" if body is None else str(body)
    deleted = body in DELETION_SENTINELS
    return Comment(
        id=cid,
        post_id=_strip_prefix(str(obj["link_id"])),
        parent_id=parent,
        author=_author(obj.get("author")),
        created=created,
        body="" if deleted else body,
        body_deleted=deleted,
    )


_PARSERS = {"posts": _parse_post, "comments": _parse_comment}


def parse_dump(line_stream: Iterable[str] | IO[str], kind: str) -> ParseResult:
    """Parse a JSONL dump of posts or comments.

    Malformed lines (bad JSON, missing or invalid required fields, duplicate
    ids) are skipped and recorded as ``(line_number, reason)``; they never
    abort the run.
    """
    try:
        parser = _PARSERS[kind]
    except KeyError:
        raise ValueError(f"unknown dump kind {kind!r}; expected 'posts' or 'comments'") from None

    result = ParseResult(records=[])
    seen: set[str] = set()
    try:
        for lineno, line in enumerate(line_stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                record = parser(obj)
            except KeyError as exc:
                result.skipped.append((lineno, f"missing field {exc.args[0]}"))
                continue
            except (ValueError, TypeError) as exc:
                result.skipped.append((lineno, str(exc) or type(exc).__name__))
                continue
            if record.id in seen:
                result.skipped.append((lineno, "duplicate id"))
                continue
            seen.add(record.id)
            result.records.append(record)
    except (OSError, UnicodeDecodeError) as exc:
        raise DumpError(f"cannot read {kind} dump: {exc}") from exc
    if result.skipped:
        logger.info("skipped %d malformed %s lines", len(result.skipped), kind)
    return result


def read_dump(path, kind: str) -> ParseResult:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_dump(fh, kind)
    except OSError as exc:
        raise DumpError(f"cannot open {path}: {exc}") from exc


@dataclass(frozen=True)
class CommentTree:
    """A post plus its reply forest.

    ``children`` maps a node id (the post id or a comment id) to its child
    comment ids in (created, id) order. ``depth`` holds comment depths; the
    post sits at depth 0.
    """

    post: Post
    comments: Mapping[str, Comment]
    children: Mapping[str, tuple[str, ...]]
    depth: Mapping[str, int]

    @property
    def n_comments(self) -> int:
        return len(self.comments)

    def parent_of(self, comment_id: str) -> str:
        return self.comments[comment_id].parent_id

    def iter_comments(self):
        """Comments in breadth-first order from the post."""
        queue = list(self.children.get(self.post.id, ()))
        i = 0
        while i < len(queue):
            cid = queue[i]
            i += 1
            yield self.comments[cid]
            queue.extend(self.children.get(cid, ()))

    def node_ids(self) -> list[str]:
        return [self.post.id] + [c.id for c in self.iter_comments()]


def _make_tree(post: Post, comments: Mapping[str, Comment]) -> CommentTree:
    kids: dict[str, list[Comment]] = defaultdict(list)
    for c in comments.values():
        kids[c.parent_id].append(c)
    children = {
        pid: tuple(c.id for c in sorted(cs, key=lambda c: (c.created, c.id)))
        for pid, cs in kids.items()
    }
    depth: dict[str, int] = {}
    frontier = [(cid, 1) for cid in children.get(post.id, ())]
    while frontier:
        cid, d = frontier.pop()
        depth[cid] = d
        frontier.extend((k, d + 1) for k in children.get(cid, ()))
    return CommentTree(post=post, comments=dict(comments), children=children, depth=depth)


@dataclass
class TreeBuildResult:
    trees: list[CommentTree]
    orphans: list[str] = field(default_factory=list)
    cycles: list[str] = field(default_factory=list)

    def report(self) -> dict:
        return {
            "n_trees": len(self.trees),
            "n_comments": sum(t.n_comments for t in self.trees),
            "n_orphans": len(self.orphans),
            "n_cycle_dropped": len(self.cycles),
            "orphans": sorted(self.orphans),
            "cycle_dropped": sorted(self.cycles),
        }


def build_trees(posts: Iterable[Post], comments: Iterable[Comment]) -> TreeBuildResult:
    """Attach comments to posts by walking each parent chain.

    Comments whose chain never reaches a known post are orphans; comments on
    a parent cycle (and their descendants) are dropped. Both are logged, and
    neither is re-rooted.
    """
    posts = list(posts)
    post_ids = {p.id for p in posts}
    by_id = {c.id: c for c in comments}

    # root[cid] = post id reached, or None for orphan, or "" for cycle
    root: dict[str, str | None] = {}
    for cid in by_id:
        if cid in root:
            continue
        path = []
        on_path = set()
        cur = cid
        outcome: str | None
        while True:
            if cur in root:
                outcome = root[cur]
                break
            if cur in on_path:
                outcome = ""
                break
            path.append(cur)
            on_path.add(cur)
            parent = by_id[cur].parent_id
            if parent in post_ids:
                outcome = parent
                break
            if parent not in by_id:
                outcome = None
                break
            cur = parent
        for node in path:
            root[node] = outcome

    result = TreeBuildResult(trees=[])
    grouped: dict[str, dict[str, Comment]] = defaultdict(dict)
    for cid, r in root.items():
        if r is None:
            result.orphans.append(cid)
        elif r == "":
            result.cycles.append(cid)
        else:
            grouped[r][cid] = by_id[cid]
    if result.orphans:
        logger.info("dropped %d orphan comments", len(result.orphans))
    if result.cycles:
        logger.warning("dropped %d comments on parent cycles", len(result.cycles))

    for post in posts:
        result.trees.append(_make_tree(post, grouped.get(post.id, {})))
    return result


def prune_to_window(tree: CommentTree, t: float) -> CommentTree:
    """Keep comments made within ``t`` minutes of the post (closed interval).

    A comment survives only if its whole ancestor chain survives too.
    """
    if t < 0:
        raise ValueError("observation window must be nonnegative")
    cutoff = tree.post.created + 60.0 * t
    kept: dict[str, Comment] = {}
    frontier = list(tree.children.get(tree.post.id, ()))
    while frontier:
        cid = frontier.pop()
        c = tree.comments[cid]
        if c.created <= cutoff:
            kept[cid] = c
            frontier.extend(tree.children.get(cid, ()))
    if len(kept) == len(tree.comments):
        return tree
    return _make_tree(tree.post, kept)


def post_to_json(post: Post) -> dict:
    return {
        "id": post.id,
        "subreddit": post.subreddit,
        "author": post.author if post.author is not None else "[deleted]",
        "created_utc": post.created,
        "title": post.title,
        "selftext": "[deleted]" if post.body_deleted else post.body,
        "num_comments": post.num_comments_eventual,
        "upvote_ratio": list(post.pupv_samples),
        "score": list(post.score_samples),
    }


def comment_to_json(comment: Comment) -> dict:
    return {
        "id": comment.id,
        "link_id": "t3_" + comment.post_id,
        "parent_id": ("t3_" if comment.parent_id == comment.post_id else "t1_") + comment.parent_id,
        "author": comment.author if comment.author is not None else "[deleted]",
        "created_utc": comment.created,
        "body": "[deleted]" if comment.body_deleted else comment.body,
    }


def write_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False))
            fh.write("\n")
