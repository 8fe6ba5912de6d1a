"""Synthetic communities with known controversy labels.

Each post draws a class, a true upvote ratio, an eventual comment count and
a reply tree. Comment arrival follows a Poisson process with exponentially
decaying intensity; each new comment picks its parent with weight
``exp(depth_bias * depth) * exp(-age / recency_scale)``, so a positive
depth bias grows chains and a negative one grows stars. Text tokens are
drawn from a community vocabulary with a class-dependent tilt.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import Comment, Post, comment_to_json, post_to_json, write_jsonl
from .postfeat import EmbeddingTable, write_embeddings

EPOCH_2012 = 1325376000


@dataclass(frozen=True)
class ClassParams:
    ratio_range: tuple[float, float]
    ratio_beta: tuple[float, float] = (2.0, 2.0)
    depth_bias: float = 0.0
    arrival_scale: float = 240.0   # minutes; mean comment time after the post
    median_comments: float = 70.0

    def validate(self):
        lo, hi = self.ratio_range
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError(f"ratio_range must satisfy 0 <= lo < hi <= 1, got {self.ratio_range}")
        if min(self.ratio_beta) <= 0:
            raise ValueError("Beta parameters must be positive")
        if self.arrival_scale <= 0 or self.median_comments <= 0:
            raise ValueError("arrival_scale and median_comments must be positive")


@dataclass(frozen=True)
class SynthConfig:
    n_posts: int = 1000
    seed: int = 0
    community: str = "synth"
    controversial: ClassParams = ClassParams((0.55, 0.78), depth_bias=0.6)
    non_controversial: ClassParams = ClassParams((0.86, 0.99), depth_bias=-0.6)
    fuzz_noise: float = 0.025
    n_queries: int = 10
    recency_scale: float = 30.0
    signal_onset: float = 0.0      # minutes; depth bias is 0 for earlier comments
    comment_sigma: float = 0.5     # lognormal spread of eventual comment counts
    votes_per_comment: float = 8.0
    vocab_size: int = 200
    text_signal: float = 0.15      # chance a token comes from the class-leaning pool
    comment_text_signal: float = 0.15
    embedding_dim: int = 16
    n_authors: int = 300
    deleted_rate: float = 0.05
    span_days: float = 730.0
    start: float = EPOCH_2012

    def validate(self):
        if self.n_posts < 0:
            raise ValueError("n_posts must be nonnegative")
        if not 0.0 <= self.fuzz_noise <= 1.0:
            raise ValueError("fuzz_noise must lie in [0, 1]")
        if self.n_queries < 1:
            raise ValueError("n_queries must be positive")
        for p in (self.text_signal, self.comment_text_signal, self.deleted_rate):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.vocab_size < 2 or self.n_authors < 1 or self.recency_scale <= 0:
            raise ValueError("vocab_size >= 2, n_authors >= 1 and recency_scale > 0 required")
        self.controversial.validate()
        self.non_controversial.validate()


@dataclass(frozen=True)
class TruthRecord:
    post_id: str
    cls: str
    true_ratio: float


@dataclass
class SynthCorpus:
    config: SynthConfig
    posts: list[Post] = field(default_factory=list)
    comments: list[Comment] = field(default_factory=list)
    truth: list[TruthRecord] = field(default_factory=list)


def fuzz_votes(true_ratio: float, n_queries: int, amplitude: float, seed=None) -> list[float]:
    """``n_queries`` uniform perturbations within +-amplitude, clipped to [0, 1]."""
    if not 0.0 <= true_ratio <= 1.0:
        raise ValueError("true_ratio must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=n_queries)
    return np.clip(true_ratio + noise, 0.0, 1.0).tolist()


def vocabulary(config: SynthConfig) -> list[str]:
    return [f"{config.community}w{i}" for i in range(config.vocab_size)]


def _tokens(rng, vocab, n, cls_is_contro, signal):
    half = len(vocab) // 2
    lean = rng.random(n) < signal
    uniform = rng.integers(0, len(vocab), size=n)
    leaning = rng.integers(0, half, size=n) + (0 if cls_is_contro else half)
    return " ".join(vocab[i] for i in np.where(lean, leaning, uniform))


def _grow_tree(rng, times, depth_bias, onset, recency):
    """Parent index per comment; -1 is the post."""
    n = times.size
    parents = np.empty(n, dtype=int)
    node_t = np.zeros(n + 1)
    node_depth = np.zeros(n + 1)
    u = rng.random(n)
    for k in range(n):
        tk = times[k]
        bias = depth_bias if tk >= onset else 0.0
        m = k + 1
        logw = bias * node_depth[:m] - (tk - node_t[:m]) / recency
        cum = np.cumsum(np.exp(logw - logw.max()))
        choice = min(int(np.searchsorted(cum, u[k] * cum[-1], side="right")), m - 1)
        parents[k] = choice - 1
        node_t[k + 1] = tk
        node_depth[k + 1] = node_depth[choice] + 1
    return parents


def _one_post(config: SynthConfig, idx: int, rng: np.random.Generator, vocab, authors):
    contro = bool(rng.random() < 0.5)
    params = config.controversial if contro else config.non_controversial
    lo, hi = params.ratio_range
    ratio = lo + (hi - lo) * rng.beta(*params.ratio_beta)
    n_eventual = max(1, int(round(params.median_comments * np.exp(config.comment_sigma * rng.normal()))))
    created = float(int(config.start + rng.uniform(0, config.span_days * 86400)))
    pid = f"{config.community}p{idx:06d}"

    votes = max(1, int(round(config.votes_per_comment * n_eventual)))
    true_score = int(round(votes * (2 * ratio - 1)))
    score_spread = max(1, int(round(config.fuzz_noise * votes)))
    scores = tuple(int(s) for s in true_score + rng.integers(-score_spread, score_spread + 1, config.n_queries))
    pupv = tuple(fuzz_votes(ratio, config.n_queries, config.fuzz_noise, rng))

    def author():
        return None if rng.random() < config.deleted_rate else authors[rng.integers(len(authors))]

    post = Post(
        id=pid,
        subreddit=config.community,
        author=author(),
        created=created,
        title=_tokens(rng, vocab, int(rng.integers(6, 13)), contro, config.text_signal),
        body=_tokens(rng, vocab, int(rng.integers(20, 61)), contro, config.text_signal),
        num_comments_eventual=n_eventual,
        pupv_samples=pupv,
        score_samples=scores,
    )

    minutes = np.sort(rng.exponential(params.arrival_scale, size=n_eventual))
    # whole seconds, like real dumps; parents never postdate children
    minutes = np.floor(minutes * 60.0) / 60.0
    parents = _grow_tree(rng, minutes, params.depth_bias, config.signal_onset, config.recency_scale)
    comments = []
    ids = [f"{pid}c{k:04d}" for k in range(n_eventual)]
    for k in range(n_eventual):
        deleted = bool(rng.random() < config.deleted_rate)
        body = _tokens(rng, vocab, int(rng.integers(5, 21)), contro, config.comment_text_signal)
        comments.append(Comment(
            id=ids[k],
            post_id=pid,
            parent_id=pid if parents[k] < 0 else ids[parents[k]],
            author=author(),
            created=created + minutes[k] * 60.0,
            body="" if deleted else body,
            body_deleted=deleted,
        ))
    truth = TruthRecord(pid, "controversial" if contro else "non_controversial", float(ratio))
    return post, comments, truth


def generate_corpus(config: SynthConfig) -> SynthCorpus:
    config.validate()
    vocab = vocabulary(config)
    authors = [f"{config.community}_user{j}" for j in range(config.n_authors)]
    corpus = SynthCorpus(config)
    seeds = np.random.SeedSequence([config.seed, 0]).spawn(config.n_posts)
    for idx, ss in enumerate(seeds):
        post, comments, truth = _one_post(config, idx, np.random.default_rng(ss), vocab, authors)
        corpus.posts.append(post)
        corpus.comments.extend(comments)
        corpus.truth.append(truth)
    return corpus


def embedding_table(config: SynthConfig) -> EmbeddingTable:
    """Random Gaussian vectors for the community vocabulary."""
    vocab = vocabulary(config)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    matrix = rng.normal(size=(len(vocab), config.embedding_dim))
    return EmbeddingTable({w: i for i, w in enumerate(vocab)}, matrix, source=f"synth:{config.community}")


def with_seed(config: SynthConfig, seed: int) -> SynthConfig:
    return replace(config, seed=seed)


def write_corpus(corpus: SynthCorpus, out_dir) -> dict[str, Path]:
    """Write posts/comments JSONL, the ground-truth CSV and an embedding file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "posts": out / "posts.jsonl",
        "comments": out / "comments.jsonl",
        "truth": out / "truth.csv",
        "embeddings": out / "embeddings.txt",
    }
    write_jsonl((post_to_json(p) for p in corpus.posts), paths["posts"])
    write_jsonl((comment_to_json(c) for c in corpus.comments), paths["comments"])
    with open(paths["truth"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["post_id", "class", "true_ratio"])
        for t in corpus.truth:
            w.writerow([t.post_id, t.cls, repr(t.true_ratio)])
    write_embeddings(embedding_table(corpus.config), paths["embeddings"])
    return paths
