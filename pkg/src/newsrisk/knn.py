"""k-nearest-neighbor label voting over document embeddings."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .linear import DimensionError
from .risks import CANONICAL_ORDER, RiskLabelSet
from .vectorize import Vectorizer

INDEX_FORMAT_VERSION = "knn-index-v1"


@dataclass
class KnnIndex:
    """Stored (embedding, label set) pairs searched by cosine similarity."""

    embeddings: np.ndarray
    labels: list[RiskLabelSet]
    k: int = 5

    def __post_init__(self) -> None:
        self.embeddings = np.asarray(self.embeddings, dtype=float)
        if self.embeddings.ndim != 2:
            raise ValueError("embeddings must be a 2-D array")
        if len(self.labels) != self.embeddings.shape[0]:
            raise ValueError("labels must align with embeddings")
        if not 1 <= self.k <= self.embeddings.shape[0]:
            raise ValueError(f"k={self.k} out of range for {self.embeddings.shape[0]} points")
        self._norms = np.linalg.norm(self.embeddings, axis=1)

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    def neighbors(self, query: np.ndarray) -> list[tuple[int, float]]:
        """All points as (stored index, cosine similarity), nearest first.

        Similarity ties break toward the lower stored index.
        """
        query = np.asarray(query, dtype=float)
        if query.shape != (self.dim,):
            raise DimensionError(f"query dim {query.shape} != index dim {self.dim}")
        query_norm = float(np.linalg.norm(query))
        denom = self._norms * query_norm
        sims = np.divide(
            self.embeddings @ query,
            denom,
            out=np.zeros(len(self.labels)),
            where=denom > 0.0,
        )
        order = np.argsort(-sims, kind="stable")
        return [(int(i), float(sims[i])) for i in order]


def knn_predict(index: KnnIndex, query: np.ndarray) -> RiskLabelSet:
    """Per-factor strict-majority vote over the k nearest neighbors.

    Split votes (possible for even k) resolve to negative.
    """
    nearest = index.neighbors(query)[: index.k]
    flags = []
    for position, _factor in enumerate(CANONICAL_ORDER):
        votes = sum(1 for i, _ in nearest if index.labels[i].flags[position])
        flags.append(votes * 2 > index.k)
    return RiskLabelSet(tuple(flags))


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> np.ndarray: ...


class HashingProjectionEmbedder:
    """Deterministic stand-in for an external embedding model.

    Projects a document's TF-IDF vector into ``dim`` buckets by hashing each
    vocabulary term with a stable digest, so embeddings are reproducible
    across runs and machines.
    """

    def __init__(self, vectorizer: Vectorizer, dim: int = 64):
        self.vectorizer = vectorizer
        self.dim = dim
        self._terms_by_index = {
            index: term for term, index in vectorizer.vocabulary.items()
        }

    def _bucket(self, term: str) -> tuple[int, float]:
        digest = hashlib.sha1(term.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "big") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return bucket, sign

    def embed(self, text: str) -> np.ndarray:
        from .corpus import tokenize

        vector = self.vectorizer.transform(tokenize(text))
        out = np.zeros(self.dim)
        for index, value in zip(vector.indices, vector.values):
            bucket, sign = self._bucket(self._terms_by_index[index])
            out[bucket] += sign * value
        norm = np.linalg.norm(out)
        return out / norm if norm > 0 else out


def build_index(
    embeddings: Sequence[np.ndarray], labels: Sequence[RiskLabelSet], k: int = 5
) -> KnnIndex:
    return KnnIndex(np.vstack(embeddings), list(labels), k=k)


def save_index(index: KnnIndex, path) -> None:
    lines = [
        f"{INDEX_FORMAT_VERSION}\tdim={index.dim}\tk={index.k}\tn={len(index.labels)}"
    ]
    for row, labels in zip(index.embeddings, index.labels):
        bits = "".join("1" if flag else "0" for flag in labels.flags)
        lines.append("\t".join([bits, *(repr(float(v)) for v in row)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_index(path) -> KnnIndex:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split("\t")
    if header[0] != INDEX_FORMAT_VERSION:
        raise ValueError(f"unsupported index format: {header[0]!r}")
    meta = dict(part.split("=", 1) for part in header[1:])
    embeddings = []
    labels = []
    for line in lines[1:]:
        bits, *values = line.split("\t")
        labels.append(RiskLabelSet(tuple(bit == "1" for bit in bits)))
        embeddings.append([float(v) for v in values])
    index = KnnIndex(np.asarray(embeddings), labels, k=int(meta["k"]))
    if index.dim != int(meta["dim"]) or len(labels) != int(meta["n"]):
        raise ValueError("index file is truncated")
    return index
