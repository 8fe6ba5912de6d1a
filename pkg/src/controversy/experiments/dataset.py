"""Labeled datasets and per-fold featurizers.

A :class:`Featurizer` is fit on training rows only and then maps any rows
(of the same or another dataset) to a :class:`FeatureMatrix`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .. import convfeat
from ..corpus import Comment, CommentTree, Post, build_trees, prune_to_window, read_dump
from ..labeler import CONTROVERSIAL, LabelRecord, label_posts
from ..learn import FeatureMatrix
from ..postfeat import (
    EmbeddingTable,
    embed_doc,
    fit_authors,
    fit_sif,
    fit_tfidf,
    fit_time,
    hand_features,
    load_doc_vectors,
    load_embeddings,
    load_lexicon,
    load_wordlists,
    pca_fit,
    tokenize,
)
from ..postfeat import transform as tfidf_transform

logger = logging.getLogger(__name__)

POST_FAMILIES = ("TEXT", "TIME", "AUTHOR", "HAND", "TFIDF", "W2V", "ARORA")
COMMENT_FAMILIES = ("C-RATE", "C-TREE", "C-TEXT")
FEATURE_FAMILIES = POST_FAMILIES + COMMENT_FAMILIES


def parse_feature_spec(spec: str | Sequence[str]) -> tuple[str, ...]:
    """``"TEXT+TIME+C-RATE"`` -> ("TEXT", "TIME", "C-RATE"), validated, de-duplicated."""
    parts = spec.split("+") if isinstance(spec, str) else list(spec)
    out = []
    for p in parts:
        name = p.strip().upper()
        if name not in FEATURE_FAMILIES:
            raise ValueError(f"unknown feature family {p!r}; choose from {', '.join(FEATURE_FAMILIES)}")
        if name not in out:
            out.append(name)
    if not out:
        raise ValueError("empty feature spec")
    return tuple(out)


def spec_name(families: Sequence[str]) -> str:
    return "+".join(families)


@dataclass
class Dataset:
    """Labeled posts with their full (unpruned) comment trees.

    ``labels`` are 1 for controversial and 0 for non-controversial.
    ``doc_vectors`` optionally maps post or comment ids to precomputed
    document vectors, which take precedence over pooling ``embeddings``.
    """

    name: str
    trees: list[CommentTree]
    labels: np.ndarray
    embeddings: EmbeddingTable | None = None
    doc_vectors: Mapping[str, np.ndarray] | None = None
    lexicon: Mapping[str, float] | None = None
    wordlists: Mapping[str, frozenset] | None = None
    text_max_tokens: int = 512
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.trees) != self.labels.size:
            raise ValueError("one label per tree required")

    def __len__(self) -> int:
        return len(self.trees)

    @property
    def row_ids(self) -> list[str]:
        return [t.post.id for t in self.trees]

    @property
    def vector_dim(self) -> int | None:
        if self.doc_vectors:
            return next(iter(self.doc_vectors.values())).size
        return self.embeddings.dim if self.embeddings is not None else None

    def eventual_comments(self) -> np.ndarray:
        return np.array([t.post.num_comments_eventual for t in self.trees])

    # cached per-row helpers --------------------------------------------------

    def _memo(self, key, fn):
        try:
            return self._cache[key]
        except KeyError:
            value = self._cache[key] = fn()
            return value

    def post_tokens(self, i: int) -> list[str]:
        post = self.trees[i].post
        return self._memo(("tok", post.id),
                          lambda: tokenize(post.title) + ([] if post.body_deleted else tokenize(post.body)))

    def post_vector(self, i: int, max_tokens: int | None = None) -> np.ndarray | None:
        post = self.trees[i].post
        max_tokens = max_tokens or self.text_max_tokens
        if self.doc_vectors is not None and post.id in self.doc_vectors:
            return self.doc_vectors[post.id]
        if self.embeddings is None:
            if self.doc_vectors is None:
                raise ValueError(f"dataset {self.name!r} has no embeddings for text features")
            return None
        return self._memo(("pvec", post.id, max_tokens),
                          lambda: embed_doc(self.post_tokens(i), self.embeddings, max_tokens))

    def comment_vector(self, comment: Comment) -> np.ndarray | None:
        if comment.body_deleted:
            return None
        if self.doc_vectors is not None and comment.id in self.doc_vectors:
            return self.doc_vectors[comment.id]
        if self.embeddings is None:
            if self.doc_vectors is None:
                raise ValueError(f"dataset {self.name!r} has no embeddings for comment text")
            return None
        return self._memo(("cvec", comment.id),
                          lambda: embed_doc(tokenize(comment.body), self.embeddings, self.text_max_tokens))

    def pruned(self, i: int, t: float) -> CommentTree:
        tree = self.trees[i]
        return self._memo(("prune", tree.post.id, t), lambda: prune_to_window(tree, t))

    def conversation(self, i: int, t: float) -> tuple[np.ndarray, np.ndarray]:
        def compute():
            pruned = self.pruned(i, t)
            r = convfeat.rate_features(pruned)
            s = convfeat.tree_features(pruned)
            return (np.array([getattr(r, c) for c in convfeat.RATE_COLUMNS], dtype=float),
                    np.array([getattr(s, c) for c in convfeat.TREE_COLUMNS], dtype=float))
        return self._memo(("conv", self.trees[i].post.id, t), compute)

    def hand_row(self, i: int) -> dict[str, float]:
        post = self.trees[i].post
        if self.lexicon is None:
            self.lexicon = load_lexicon()
        if self.wordlists is None:
            self.wordlists = load_wordlists()
        return self._memo(("hand", post.id), lambda: hand_features(
            post.title, "" if post.body_deleted else post.body, self.lexicon, self.wordlists).to_row())

    def subset(self, rows: Sequence[int], name: str | None = None) -> "Dataset":
        rows = list(rows)
        return Dataset(name or self.name, [self.trees[i] for i in rows], self.labels[rows],
                       self.embeddings, self.doc_vectors, self.lexicon, self.wordlists,
                       self.text_max_tokens)


@dataclass
class IngestReport:
    n_posts: int
    n_comments: int
    skipped_posts: list
    skipped_comments: list
    tree_report: dict
    label_records: list[LabelRecord]

    def to_dict(self) -> dict:
        reasons: dict[str, int] = {}
        for r in self.label_records:
            key = r.label if r.labeled else r.discard_reason
            reasons[key] = reasons.get(key, 0) + 1
        return {
            "n_posts": self.n_posts,
            "n_comments": self.n_comments,
            "n_skipped_posts": len(self.skipped_posts),
            "n_skipped_comments": len(self.skipped_comments),
            "skipped_posts": [list(s) for s in self.skipped_posts],
            "skipped_comments": [list(s) for s in self.skipped_comments],
            "trees": self.tree_report,
            "labels": dict(sorted(reasons.items())),
        }


def dataset_from_records(name: str, posts: Iterable[Post], comments: Iterable[Comment],
                         embeddings=None, doc_vectors=None, label_records=None):
    """Build trees, label posts, and keep the labeled ones."""
    posts = list(posts)
    built = build_trees(posts, comments)
    records = label_posts(posts) if label_records is None else list(label_records)
    by_id = {r.post_id: r for r in records}
    trees, labels = [], []
    for tree in sorted(built.trees, key=lambda t: t.post.id):
        rec = by_id.get(tree.post.id)
        if rec is not None and rec.labeled:
            trees.append(tree)
            labels.append(1 if rec.label == CONTROVERSIAL else 0)
    ds = Dataset(name, trees, np.array(labels, dtype=int), embeddings, doc_vectors)
    return ds, built, records


def load_dataset(posts_path, comments_path, name: str = "community", embeddings_path=None,
                 doc_vectors_path=None) -> tuple[Dataset, IngestReport]:
    posts = read_dump(posts_path, "posts")
    comments = read_dump(comments_path, "comments")
    embeddings = load_embeddings(embeddings_path) if embeddings_path else None
    doc_vectors = load_doc_vectors(doc_vectors_path) if doc_vectors_path else None
    ds, built, records = dataset_from_records(name, posts.records, comments.records, embeddings, doc_vectors)
    report = IngestReport(len(posts.records), len(comments.records), posts.skipped, comments.skipped,
                          built.report(), records)
    return ds, report


# --- featurizer ---------------------------------------------------------------

def _stack_vectors(vectors: list[np.ndarray | None], dim: int | None) -> np.ndarray:
    if dim is None:
        dims = {v.size for v in vectors if v is not None}
        if len(dims) > 1:
            raise ValueError(f"inconsistent vector dimensions {sorted(dims)}")
        dim = dims.pop() if dims else 0
    out = np.full((len(vectors), dim), np.nan)
    for r, v in enumerate(vectors):
        if v is not None:
            if v.size != dim:
                raise ValueError(f"vector dimension {v.size} does not match fitted dimension {dim}")
            out[r] = v
    return out


class _PCABlock:
    """PCA on the non-missing training vectors; missing rows stay NaN."""

    def __init__(self, prefix: str, d_out: int):
        self.prefix = prefix
        self.d_out = d_out
        self.dim = None
        self.projection = None

    def fit(self, vectors):
        mat = _stack_vectors(vectors, None)
        self.dim = mat.shape[1]
        good = mat[~np.isnan(mat).any(axis=1)]
        k = min(self.d_out, self.dim, len(good))
        if k == 0:
            raise ValueError(f"no training vectors available for {self.prefix}")
        self.projection = pca_fit(good, k)
        return self

    @property
    def columns(self):
        return [f"{self.prefix}{k}" for k in range(self.projection.components.shape[0])]

    def transform(self, vectors):
        mat = _stack_vectors(vectors, self.dim)
        return self.projection.apply(mat)  # NaN rows propagate


class Featurizer:
    """Feature families for one observation window ``t`` (None = post time only)."""

    def __init__(self, families: Sequence[str] | str, t: float | None = None, *,
                 pca_dim: int = 100, tfidf_min_count: int = 5, author_min_count: int = 3,
                 sif_a: float = 1e-3, w2v_max_tokens: int | None = None):
        self.families = parse_feature_spec(families)
        if t is None and any(f in COMMENT_FAMILIES for f in self.families):
            raise ValueError("comment feature families need an observation window t")
        self.t = t
        self.pca_dim = pca_dim
        self.tfidf_min_count = tfidf_min_count
        self.author_min_count = author_min_count
        self.sif_a = sif_a
        self.w2v_max_tokens = w2v_max_tokens
        self.state: dict = {}
        self.fitted_rows: tuple[int, ...] | None = None

    @property
    def name(self) -> str:
        return spec_name(self.families)

    def fit(self, dataset: Dataset, rows: Sequence[int]) -> "Featurizer":
        rows = list(rows)
        self.fitted_rows = tuple(rows)
        self.state = {"vector_dim": dataset.vector_dim}
        for fam in self.families:
            if fam == "TEXT":
                self.state[fam] = _PCABlock("text_pc", self.pca_dim).fit(
                    [dataset.post_vector(i) for i in rows])
            elif fam == "TIME":
                self.state[fam] = fit_time(dataset.trees[i].post.created for i in rows)
            elif fam == "AUTHOR":
                self.state[fam] = fit_authors((dataset.trees[i].post.author for i in rows),
                                              self.author_min_count)
            elif fam == "HAND":
                self.state[fam] = list(dataset.hand_row(rows[0]))
            elif fam == "TFIDF":
                self.state[fam] = fit_tfidf((dataset.post_tokens(i) for i in rows), self.tfidf_min_count)
            elif fam == "ARORA":
                self._need_table(dataset)
                self.state[fam] = fit_sif([dataset.post_tokens(i) for i in rows], dataset.embeddings, self.sif_a)
            elif fam == "C-TEXT":
                self.state[fam] = _PCABlock("ctext_pc", self.pca_dim).fit(
                    [self._ctext(dataset, i) for i in rows])
        return self

    @staticmethod
    def _need_table(dataset: Dataset):
        if dataset.embeddings is None:
            raise ValueError(f"dataset {dataset.name!r} has no word embeddings")

    def _ctext(self, dataset: Dataset, i: int):
        return convfeat.ctext_features(dataset.pruned(i, self.t), dataset.comment_vector)

    def transform(self, dataset: Dataset, rows: Sequence[int]) -> FeatureMatrix:
        if self.fitted_rows is None:
            raise RuntimeError("featurizer used before fit")
        rows = list(rows)
        if (self.state["vector_dim"] is not None and dataset.vector_dim is not None
                and dataset.vector_dim != self.state["vector_dim"]):
            raise ValueError(
                f"dataset {dataset.name!r} has vector dimension {dataset.vector_dim}, "
                f"featurizer was fit on {self.state['vector_dim']}"
            )
        ids = [dataset.trees[i].post.id for i in rows]
        blocks = [self._block(fam, dataset, rows, ids) for fam in self.families]
        return FeatureMatrix.hstack(blocks)

    def _block(self, fam: str, ds: Dataset, rows: list[int], ids: list[str]) -> FeatureMatrix:
        st = self.state.get(fam)
        if fam == "TEXT":
            return FeatureMatrix.from_array(ids, st.columns, st.transform([ds.post_vector(i) for i in rows]))
        if fam == "TIME":
            vals = [st.transform(ds.trees[i].post.created) for i in rows]
            return FeatureMatrix.from_array(ids, st.columns, np.array(vals).reshape(len(rows), -1))
        if fam == "AUTHOR":
            vals = [st.transform(ds.trees[i].post.author) for i in rows]
            return FeatureMatrix.from_array(ids, st.columns, np.array(vals).reshape(len(rows), len(st.columns)))
        if fam == "HAND":
            vals = [[ds.hand_row(i).get(c, 0.0) for c in st] for i in rows]
            return FeatureMatrix.from_array(ids, [f"hand_{c}" for c in st], vals)
        if fam == "TFIDF":
            cols = [f"tfidf_{w}" for w in st.vocabulary]
            mat = tfidf_transform(st, (ds.post_tokens(i) for i in rows)).toarray()
            return FeatureMatrix.from_array(ids, cols, mat)
        if fam == "W2V":
            self._need_table(ds)
            mat = _stack_vectors([embed_doc(ds.post_tokens(i), ds.embeddings, self.w2v_max_tokens or 10**9)
                                  for i in rows], ds.embeddings.dim)
            return FeatureMatrix.from_array(ids, [f"w2v_{k}" for k in range(mat.shape[1])], mat)
        if fam == "ARORA":
            self._need_table(ds)
            mat = _stack_vectors([st.transform(ds.post_tokens(i), ds.embeddings) for i in rows],
                                 ds.embeddings.dim)
            return FeatureMatrix.from_array(ids, [f"arora_{k}" for k in range(mat.shape[1])], mat)
        if fam == "C-RATE":
            mat = np.array([ds.conversation(i, self.t)[0] for i in rows]).reshape(len(rows), -1)
            return FeatureMatrix.from_array(ids, list(convfeat.RATE_COLUMNS), mat)
        if fam == "C-TREE":
            mat = np.array([ds.conversation(i, self.t)[1] for i in rows]).reshape(len(rows), -1)
            return FeatureMatrix.from_array(ids, list(convfeat.TREE_COLUMNS), mat)
        if fam == "C-TEXT":
            return FeatureMatrix.from_array(ids, st.columns, st.transform([self._ctext(ds, i) for i in rows]))
        raise AssertionError(fam)
