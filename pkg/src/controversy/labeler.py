"""Controversy labels from noisy percent-upvoted observations."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Post

CONTROVERSIAL = "controversial"
NON_CONTROVERSIAL = "non_controversial"
DISCARDED = "discarded"

MIN_COMMENTS = 30
MAX_PUPV_RANGE = 0.05
MIN_PUPV = 0.5
# guards the strict range comparison against float round-off (0.7 - 0.65 etc.)
_RANGE_EPS = 1e-9


@dataclass(frozen=True)
class LabelRecord:
    post_id: str
    pupv_estimate: float
    label: str
    discard_reason: str | None = None

    @property
    def labeled(self) -> bool:
        return self.label != DISCARDED


def estimate_pupv(samples: Sequence[float]) -> float:
    if len(samples) == 0:
        raise ValueError("cannot estimate percent upvoted from zero samples")
    return float(sum(samples) / len(samples))


def _discard_reason(post: Post) -> str | None:
    if post.num_comments_eventual < MIN_COMMENTS:
        return "too_few_comments"
    pupv = post.pupv_samples
    if max(pupv) - min(pupv) > MAX_PUPV_RANGE + _RANGE_EPS:
        return "unstable_estimate"
    scores = post.score_samples
    if max(pupv) == min(pupv) and (not scores or max(scores) == min(scores)):
        return "degenerate_votes"
    if estimate_pupv(pupv) < MIN_PUPV:
        return "below_half"
    return None


def filter_posts(posts: Iterable[Post]) -> tuple[list[Post], list[LabelRecord]]:
    """Apply the filtering cascade; return survivors and discard records."""
    survivors, discarded = [], []
    for post in posts:
        if not post.pupv_samples:
            raise ValueError(f"post {post.id} has no upvote-ratio samples")
        reason = _discard_reason(post)
        if reason is None:
            survivors.append(post)
        else:
            discarded.append(
                LabelRecord(post.id, estimate_pupv(post.pupv_samples), DISCARDED, reason)
            )
    return survivors, discarded


def assign_labels(posts: Sequence[Post]) -> list[LabelRecord]:
    """Bottom quartile by estimate -> controversial, top quartile -> not.

    Both classes get exactly ``n // 4`` posts; ties are broken by post id.
    """
    n = len(posts)
    if n < 8:
        raise ValueError(f"need at least 8 surviving posts to form quartiles, got {n}")
    ranked = sorted(((estimate_pupv(p.pupv_samples), p.id) for p in posts))
    q = n // 4
    records = []
    for i, (est, pid) in enumerate(ranked):
        if i < q:
            records.append(LabelRecord(pid, est, CONTROVERSIAL))
        elif i >= n - q:
            records.append(LabelRecord(pid, est, NON_CONTROVERSIAL))
        else:
            records.append(LabelRecord(pid, est, DISCARDED, "middle_band"))
    return records


def label_posts(posts: Iterable[Post]) -> list[LabelRecord]:
    """filter_posts followed by assign_labels, one record per input post."""
    survivors, discarded = filter_posts(posts)
    return assign_labels(survivors) + discarded


def class_scores(predicted: Sequence[str], truth: Sequence[str]) -> dict:
    """Per-class precision, recall and F1 for the two controversy labels."""
    out = {}
    for cls in (CONTROVERSIAL, NON_CONTROVERSIAL):
        tp = sum(1 for p, t in zip(predicted, truth) if p == cls and t == cls)
        fp = sum(1 for p, t in zip(predicted, truth) if p == cls and t != cls)
        fn = sum(1 for p, t in zip(predicted, truth) if p != cls and t == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[cls] = {"precision": precision, "recall": recall, "f1": f, "support": tp + fn}
    return out


def validate_against_ranking(
    posts: Sequence[Post],
    external_controversial_ids: Iterable[str],
    k: int,
    seed: int = 0,
) -> dict:
    """Score our labels against an external controversy ranking.

    Every listed post is paired with ``k`` randomly chosen unlisted posts;
    the sample is filtered and labeled, and survivors are compared with the
    external tag (listed -> controversial).
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    listed_ids = set(external_controversial_ids)
    if not listed_ids:
        raise ValueError("external controversial id set is empty")
    listed = [p for p in posts if p.id in listed_ids]
    unlisted = sorted((p for p in posts if p.id not in listed_ids), key=lambda p: p.id)
    rng = random.Random(seed)
    n_take = min(len(unlisted), k * len(listed))
    sample = listed + rng.sample(unlisted, n_take)

    records = label_posts(sample)
    labeled = [r for r in records if r.labeled]
    predicted = [r.label for r in labeled]
    truth = [CONTROVERSIAL if r.post_id in listed_ids else NON_CONTROVERSIAL for r in labeled]
    scores = class_scores(predicted, truth)
    return {
        "k": k,
        "n_listed": len(listed),
        "n_sampled": len(sample),
        "n_survivors": len(labeled),
        "scores": scores,
    }


def class_mean_pupv(records: Iterable[LabelRecord]) -> dict[str, float]:
    out = {}
    records = list(records)
    for cls in (CONTROVERSIAL, NON_CONTROVERSIAL):
        vals = [r.pupv_estimate for r in records if r.label == cls]
        out[cls] = float(np.mean(vals)) if vals else float("nan")
    return out


def write_labels_csv(records: Iterable[LabelRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["post_id", "pupv_estimate", "label", "discard_reason"])
        for r in sorted(records, key=lambda r: r.post_id):
            w.writerow([r.post_id, repr(r.pupv_estimate), r.label, r.discard_reason or ""])


def read_labels_csv(path) -> list[LabelRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            LabelRecord(row["post_id"], float(row["pupv_estimate"]), row["label"],
                        row["discard_reason"] or None)
            for row in csv.DictReader(fh)
        ]


def read_id_list(path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}
