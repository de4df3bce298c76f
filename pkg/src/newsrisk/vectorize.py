"""Sparse TF-IDF featurization over unigrams and bigrams, built from scratch.

idf uses the smoothed form ln((1+N)/(1+df)) + 1, which never divides by zero
and keeps every idf >= 1; rows are L2-normalized raw-count TF times idf.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

FORMAT_VERSION = "tfidf-v1"


class FitError(ValueError):
    """Raised when a vectorizer cannot be fit."""


@dataclass(frozen=True)
class SparseVector:
    """Strictly increasing (index, value) pairs over a fixed dimension."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must align")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.dim):
            raise ValueError("index out of range")

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def dot(self, other: "SparseVector") -> float:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        total = 0.0
        i = j = 0
        while i < len(self.indices) and j < len(other.indices):
            a, b = self.indices[i], other.indices[j]
            if a == b:
                total += self.values[i] * other.values[j]
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        return total

    def cosine(self, other: "SparseVector") -> float:
        denom = self.norm() * other.norm()
        if denom == 0.0:
            return 0.0
        return self.dot(other) / denom

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        if self.indices:
            dense[list(self.indices)] = self.values
        return dense


def ngrams(tokens: Sequence[str], ngram_max: int) -> list[str]:
    """Unigrams plus space-joined n-grams up to ngram_max over one stream."""
    out = list(tokens)
    for n in range(2, ngram_max + 1):
        out.extend(
            " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return out


class Vectorizer:
    """TF-IDF model; frozen once fitted, safe to share across threads."""

    def __init__(
        self,
        vocabulary: dict[str, int],
        idf: dict[str, float],
        df: dict[str, int],
        n_docs: int,
        min_df: int,
        ngram_max: int,
    ):
        self.vocabulary = vocabulary
        self.idf = idf
        self.df = df
        self.n_docs = n_docs
        self.min_df = min_df
        self.ngram_max = ngram_max

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def transform(self, tokens: Sequence[str]) -> SparseVector:
        """Raw counts times idf over in-vocabulary n-grams, L2-normalized."""
        counts = Counter(ngrams(tokens, self.ngram_max))
        weighted = {
            self.vocabulary[term]: count * self.idf[term]
            for term, count in counts.items()
            if term in self.vocabulary
        }
        if not weighted:
            return SparseVector((), (), self.dim)
        norm = math.sqrt(sum(v * v for v in weighted.values()))
        indices = tuple(sorted(weighted))
        values = tuple(weighted[i] / norm for i in indices)
        return SparseVector(indices, values, self.dim)

    def transform_many(self, docs: Iterable[Sequence[str]]) -> list[SparseVector]:
        return [self.transform(doc) for doc in docs]


def fit(
    docs: Sequence[Sequence[str]], min_df: int = 1, ngram_max: int = 2
) -> Vectorizer:
    """Fit vocabulary and idf on tokenized documents.

    Vocabulary keeps every n-gram with document frequency >= min_df; column
    indices are assigned in sorted-term order so fitting is order-insensitive.
    """
    if not docs:
        raise FitError("cannot fit a vectorizer on an empty document list")
    if min_df < 1:
        raise FitError(f"min_df must be >= 1, got {min_df}")
    df_census: Counter[str] = Counter()
    for tokens in docs:
        df_census.update(set(ngrams(tokens, ngram_max)))
    kept = sorted(term for term, df in df_census.items() if df >= min_df)
    n_docs = len(docs)
    vocabulary = {term: index for index, term in enumerate(kept)}
    idf = {
        term: math.log((1 + n_docs) / (1 + df_census[term])) + 1.0 for term in kept
    }
    df = {term: df_census[term] for term in kept}
    return Vectorizer(vocabulary, idf, df, n_docs, min_df, ngram_max)


def save_vectorizer(vectorizer: Vectorizer, path) -> None:
    """Versioned flat file: a header line, then one term per line."""
    lines = [
        f"{FORMAT_VERSION}\tV={vectorizer.dim}\tN={vectorizer.n_docs}"
        f"\tmin_df={vectorizer.min_df}\tngram_max={vectorizer.ngram_max}"
    ]
    for term in sorted(vectorizer.vocabulary, key=vectorizer.vocabulary.get):
        lines.append(f"{term}\t{vectorizer.df[term]}\t{vectorizer.idf[term]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_vectorizer(path) -> Vectorizer:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FitError(f"empty vectorizer file: {path}")
    header = lines[0].split("\t")
    if header[0] != FORMAT_VERSION:
        raise FitError(f"unsupported vectorizer format: {header[0]!r}")
    meta = dict(part.split("=", 1) for part in header[1:])
    vocabulary: dict[str, int] = {}
    idf: dict[str, float] = {}
    df: dict[str, int] = {}
    for index, line in enumerate(lines[1:]):
        term, df_str, idf_str = line.split("\t")
        vocabulary[term] = index
        df[term] = int(df_str)
        idf[term] = float(idf_str)
    if len(vocabulary) != int(meta["V"]):
        raise FitError("vectorizer file is truncated")
    return Vectorizer(
        vocabulary,
        idf,
        df,
        n_docs=int(meta["N"]),
        min_df=int(meta["min_df"]),
        ngram_max=int(meta["ngram_max"]),
    )
