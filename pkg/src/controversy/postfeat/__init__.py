from .embeddings import (
    EmbeddingFormatError,
    EmbeddingTable,
    PCAProjection,
    SIFModel,
    embed_doc,
    fit_sif,
    load_doc_vectors,
    load_embeddings,
    pca_apply,
    pca_fit,
    sif_embed,
    write_embeddings,
)
from .fightin import fightin_words
from .meta import AuthorEncoder, TimeEncoder, author_features, fit_authors, fit_time, time_features
from .text import HandFeatures, hand_features, load_lexicon, load_wordlists, tokenize
from .tfidf import TfidfModel, fit_tfidf, transform

__all__ = [
    "AuthorEncoder", "EmbeddingFormatError", "EmbeddingTable", "HandFeatures", "PCAProjection",
    "SIFModel", "TfidfModel", "TimeEncoder", "author_features", "embed_doc", "fightin_words",
    "fit_authors", "fit_sif", "fit_tfidf", "fit_time", "hand_features", "load_doc_vectors",
    "load_embeddings", "load_lexicon", "load_wordlists", "pca_apply", "pca_fit", "sif_embed",
    "time_features", "tokenize", "transform", "write_embeddings",
]
