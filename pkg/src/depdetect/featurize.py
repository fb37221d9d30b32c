"""TF-IDF vectors over dependency-label n-grams.

Terms are deprel n-grams (labels joined by one space). Weighting is raw
term count times smoothed idf ln((1+N)/(1+df))+1, L2-normalized per
document. Vocabulary order is lexicographic so feature indices are
reproducible across runs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class NgramRange:
    min_n: int
    max_n: int

    def __post_init__(self):
        if not (1 <= self.min_n <= self.max_n <= 4):
            raise ValueError(
                f"ngram range must satisfy 1 <= min <= max <= 4, got "
                f"({self.min_n},{self.max_n})"
            )


@dataclass(frozen=True)
class FeatureSpace:
    ngram_range: NgramRange
    vocabulary: dict  # n-gram string -> feature index, lexicographic
    idf: np.ndarray  # float64, len == len(vocabulary)
    num_train_docs: int
    cross_sentences: bool = False

    @property
    def dim(self):
        return len(self.vocabulary)

    def feature_names(self):
        names = [None] * len(self.vocabulary)
        for ngram, idx in self.vocabulary.items():
            names[idx] = ngram
        return names


@dataclass(frozen=True)
class SparseVector:
    """TF-IDF row: strictly increasing indices with positive weights."""

    indices: np.ndarray  # int64
    weights: np.ndarray  # float64
    dim: int

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.weights
        return out


@dataclass(frozen=True)
class SparseMatrix:
    """CSR stack of SparseVector rows."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    shape: tuple

    @classmethod
    def from_rows(cls, rows, dim=None):
        rows = list(rows)
        if dim is None:
            if not rows:
                raise ValueError("dim required for an empty matrix")
            dim = rows[0].dim
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        for i, r in enumerate(rows):
            indptr[i + 1] = indptr[i] + len(r.indices)
        indices = np.concatenate([r.indices for r in rows]) if rows else np.zeros(0, np.int64)
        weights = np.concatenate([r.weights for r in rows]) if rows else np.zeros(0)
        return cls(indptr, indices, weights, (len(rows), dim))

    def row(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.indices[lo:hi], self.weights[lo:hi], self.shape[1])

    def to_dense(self):
        n, d = self.shape
        out = np.zeros((n, d))
        for i in range(n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.weights[lo:hi]
        return out


def count_ngrams(doc, ngram_range, cross_sentences=False):
    """Count label n-grams per document.

    Windows never span sentence boundaries unless `cross_sentences` is
    set, in which case the document is treated as one long sequence.
    """
    counts = Counter()
    if cross_sentences:
        sequences = [[lab for seq in doc.sentences for lab in seq]]
    else:
        sequences = doc.sentences
    for seq in sequences:
        for n in range(ngram_range.min_n, ngram_range.max_n + 1):
            for i in range(len(seq) - n + 1):
                counts[" ".join(seq[i : i + n])] += 1
    return counts


def fit(corpus, ngram_range, cross_sentences=False):
    """Build the frozen vocabulary and idf weights from a training corpus."""
    corpus = list(corpus)
    if not corpus:
        raise FitError("cannot fit a feature space on an empty corpus")
    df = Counter()
    for doc in corpus:
        df.update(count_ngrams(doc, ngram_range, cross_sentences).keys())
    vocabulary = {ngram: i for i, ngram in enumerate(sorted(df))}
    n_docs = len(corpus)
    idf = np.empty(len(vocabulary))
    for ngram, i in vocabulary.items():
        idf[i] = np.log((1.0 + n_docs) / (1.0 + df[ngram])) + 1.0
    return FeatureSpace(
        ngram_range=ngram_range,
        vocabulary=vocabulary,
        idf=idf,
        num_train_docs=n_docs,
        cross_sentences=cross_sentences,
    )


def transform(doc, space):
    """TF-IDF vector for one document; zero vector when nothing is in-vocabulary."""
    counts = count_ngrams(doc, space.ngram_range, space.cross_sentences)
    pairs = sorted(
        (space.vocabulary[ng], c) for ng, c in counts.items() if ng in space.vocabulary
    )
    if not pairs:
        return SparseVector(np.zeros(0, np.int64), np.zeros(0), space.dim)
    indices = np.array([i for i, _ in pairs], dtype=np.int64)
    weights = np.array([c for _, c in pairs], dtype=np.float64) * space.idf[indices]
    norm = np.sqrt(np.sum(weights * weights))
    return SparseVector(indices, weights / norm, space.dim)


def transform_corpus(corpus, space):
    return SparseMatrix.from_rows([transform(d, space) for d in corpus], dim=space.dim)
