"""Seven-way multi-label prediction assembled from per-factor binary models.

Each factor's prediction is a pure function of the shared vectorizer, that
factor's sub-model, and the sample; sub-models never interact.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Sample, tokenize
from .endpoints import InferenceClient
from .knn import (
    HashingProjectionEmbedder,
    KnnIndex,
    build_index,
    load_index,
    save_index,
)
from .linear import (
    Hyperparameters,
    LinearModel,
    predict_linear,
    train_logistic,
    train_svm,
)
from .risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet
from .vectorize import Vectorizer, fit, load_vectorizer, save_vectorizer

FAMILIES = ("random", "logreg", "svm", "knn")

MANIFEST_VERSION = "multilabel-v1"
LINEAR_FORMAT_VERSION = "linear-v1"


def random_predict(rng_seed: int, n_samples: int) -> list[RiskLabelSet]:
    """Independent fair coin flips for every (sample, factor) flag."""
    rng = random.Random(rng_seed)
    return [
        RiskLabelSet(tuple(rng.random() < 0.5 for _ in CANONICAL_ORDER))
        for _ in range(n_samples)
    ]


@dataclass(frozen=True)
class ConstantModel:
    """Fallback for single-class training labels."""

    label: bool

    def predict(self, _vector, _sample) -> tuple[float, bool]:
        return (1.0 if self.label else 0.0), self.label


@dataclass(frozen=True)
class RandomFactorModel:
    """Seeded fair coin; the draw is a pure function of (seed, sample, factor)."""

    seed: int
    factor: RiskFactor

    def predict(self, _vector, sample: Sample) -> tuple[float, bool]:
        key = f"{self.seed}:{sample.sample_id}:{self.factor.value}".encode("utf-8")
        digest = hashlib.sha256(key).digest()
        score = int.from_bytes(digest[:8], "big") / 2**64
        return score, score >= 0.5


@dataclass(frozen=True)
class LinearFactorModel:
    model: LinearModel
    threshold: float = 0.5

    def predict(self, vector, _sample) -> tuple[float, bool]:
        return predict_linear(self.model, vector, self.threshold)


@dataclass(frozen=True)
class KnnFactorModel:
    """One factor's view over a shared embedding index."""

    index: KnnIndex
    position: int
    embedder: object

    def predict(self, _vector, sample: Sample) -> tuple[float, bool]:
        query = self.embedder.embed(sample.truncated_text)
        nearest = self.index.neighbors(query)[: self.index.k]
        votes = sum(1 for i, _ in nearest if self.index.labels[i].flags[self.position])
        return votes / self.index.k, votes * 2 > self.index.k


@dataclass(frozen=True)
class TrainConfig:
    family: str = "logreg"
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    threshold: float = 0.5
    knn_k: int = 5
    embed_dim: int = 64
    min_df: int = 1
    ngram_max: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")


@dataclass
class MultiLabelModel:
    vectorizer: Vectorizer
    submodels: dict[RiskFactor, object]
    config: TrainConfig

    def __post_init__(self) -> None:
        if set(self.submodels) != set(CANONICAL_ORDER):
            raise ValueError("need exactly one sub-model per risk factor")


@dataclass(frozen=True)
class MultiLabelPrediction:
    labels: RiskLabelSet
    scores: dict[RiskFactor, float]


def train_multilabel(
    samples: Sequence[Sample],
    gold: Sequence[RiskLabelSet],
    config: TrainConfig = TrainConfig(),
    embedder=None,
) -> MultiLabelModel:
    """Fit the shared vectorizer, then one independent model per factor.

    Factors whose training labels are single-class fall back to a constant
    predictor of that class, whatever the configured family.
    """
    if not samples:
        raise ValueError("empty training set")
    if len(samples) != len(gold):
        raise ValueError("gold labels must align with samples")
    docs = [tokenize(s.truncated_text) for s in samples]
    vectorizer = fit(docs, min_df=config.min_df, ngram_max=config.ngram_max)
    X = vectorizer.transform_many(docs)

    index: Optional[KnnIndex] = None
    if config.family == "knn":
        if embedder is None:
            embedder = HashingProjectionEmbedder(vectorizer, dim=config.embed_dim)
        embeddings = [embedder.embed(s.truncated_text) for s in samples]
        index = build_index(embeddings, gold, k=min(config.knn_k, len(samples)))

    submodels: dict[RiskFactor, object] = {}
    for position, factor in enumerate(CANONICAL_ORDER):
        y = [labels.flags[position] for labels in gold]
        if all(y) or not any(y):
            submodels[factor] = ConstantModel(label=y[0])
            continue
        if config.family == "random":
            submodels[factor] = RandomFactorModel(seed=config.seed, factor=factor)
        elif config.family == "logreg":
            submodels[factor] = LinearFactorModel(
                train_logistic(X, y, config.hyper), config.threshold
            )
        elif config.family == "svm":
            submodels[factor] = LinearFactorModel(
                train_svm(X, y, config.hyper), config.threshold
            )
        else:
            submodels[factor] = KnnFactorModel(index, position, embedder)
    return MultiLabelModel(vectorizer=vectorizer, submodels=submodels, config=config)


def predict_multilabel(model: MultiLabelModel, sample: Sample) -> MultiLabelPrediction:
    vector = model.vectorizer.transform(tokenize(sample.truncated_text))
    flags = []
    scores: dict[RiskFactor, float] = {}
    for factor in CANONICAL_ORDER:
        score, label = model.submodels[factor].predict(vector, sample)
        scores[factor] = score
        flags.append(label)
    return MultiLabelPrediction(RiskLabelSet(tuple(flags)), scores)


def remote_classify(
    client: InferenceClient, sample: Sample, threshold: float = 0.5
) -> MultiLabelPrediction:
    """Classify through the external inference endpoint, thresholding at 0.5."""
    raw = client.classify(sample.truncated_text, sample.company_name)
    scores = dict(zip(CANONICAL_ORDER, raw))
    labels = RiskLabelSet(tuple(score >= threshold for score in raw))
    return MultiLabelPrediction(labels, scores)


def _save_linear(model: LinearModel, threshold: float, path: Path) -> None:
    hyper = model.hyper
    lines = [
        f"{LINEAR_FORMAT_VERSION}\tkind={model.kind}\tdim={model.dim}"
        f"\tbias={model.bias!r}\tthreshold={threshold!r}"
        f"\tl2_lambda={hyper.l2_lambda!r}\tepochs={hyper.epochs}"
        f"\tlearning_rate={hyper.learning_rate!r}\tseed={hyper.seed}"
    ]
    lines.extend(repr(float(w)) for w in model.weights)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_linear(path: Path) -> LinearFactorModel:
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    if header[0] != LINEAR_FORMAT_VERSION:
        raise ValueError(f"unsupported linear model format: {header[0]!r}")
    meta = dict(part.split("=", 1) for part in header[1:])
    weights = np.asarray([float(line) for line in lines[1:]])
    if weights.shape[0] != int(meta["dim"]):
        raise ValueError("linear model file is truncated")
    model = LinearModel(
        weights=weights,
        bias=float(meta["bias"]),
        kind=meta["kind"],
        hyper=Hyperparameters(
            l2_lambda=float(meta["l2_lambda"]),
            epochs=int(meta["epochs"]),
            learning_rate=float(meta["learning_rate"]),
            seed=int(meta["seed"]),
        ),
    )
    return LinearFactorModel(model, threshold=float(meta["threshold"]))


def save_model(model: MultiLabelModel, directory) -> None:
    """Persist to a directory of versioned flat text files plus a manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_vectorizer(model.vectorizer, directory / "vectorizer.tsv")
    factors: dict[str, dict] = {}
    index_saved = False
    for factor in CANONICAL_ORDER:
        sub = model.submodels[factor]
        if isinstance(sub, ConstantModel):
            factors[factor.value] = {"kind": "constant", "label": sub.label}
        elif isinstance(sub, RandomFactorModel):
            factors[factor.value] = {"kind": "random", "seed": sub.seed}
        elif isinstance(sub, LinearFactorModel):
            filename = f"linear_{factor.value}.txt"
            _save_linear(sub.model, sub.threshold, directory / filename)
            factors[factor.value] = {"kind": sub.model.kind, "file": filename}
        elif isinstance(sub, KnnFactorModel):
            if not index_saved:
                save_index(sub.index, directory / "knn_index.tsv")
                index_saved = True
            factors[factor.value] = {"kind": "knn", "file": "knn_index.tsv"}
        else:
            raise ValueError(f"cannot persist sub-model {type(sub).__name__}")
    manifest = {
        "format": MANIFEST_VERSION,
        "family": model.config.family,
        "threshold": model.config.threshold,
        "knn_k": model.config.knn_k,
        "embed_dim": model.config.embed_dim,
        "min_df": model.config.min_df,
        "ngram_max": model.config.ngram_max,
        "seed": model.config.seed,
        "hyper": {
            "l2_lambda": model.config.hyper.l2_lambda,
            "epochs": model.config.hyper.epochs,
            "learning_rate": model.config.hyper.learning_rate,
            "seed": model.config.hyper.seed,
        },
        "factors": factors,
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(directory) -> MultiLabelModel:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format") != MANIFEST_VERSION:
        raise ValueError(f"unsupported model format: {manifest.get('format')!r}")
    vectorizer = load_vectorizer(directory / "vectorizer.tsv")
    config = TrainConfig(
        family=manifest["family"],
        hyper=Hyperparameters(**manifest["hyper"]),
        threshold=manifest["threshold"],
        knn_k=manifest["knn_k"],
        embed_dim=manifest["embed_dim"],
        min_df=manifest["min_df"],
        ngram_max=manifest["ngram_max"],
        seed=manifest["seed"],
    )
    index: Optional[KnnIndex] = None
    embedder = None
    submodels: dict[RiskFactor, object] = {}
    for position, factor in enumerate(CANONICAL_ORDER):
        entry = manifest["factors"][factor.value]
        kind = entry["kind"]
        if kind == "constant":
            submodels[factor] = ConstantModel(label=bool(entry["label"]))
        elif kind == "random":
            submodels[factor] = RandomFactorModel(seed=int(entry["seed"]), factor=factor)
        elif kind in ("logistic", "hinge"):
            submodels[factor] = _load_linear(directory / entry["file"])
        elif kind == "knn":
            if index is None:
                index = load_index(directory / entry["file"])
                embedder = HashingProjectionEmbedder(vectorizer, dim=config.embed_dim)
            submodels[factor] = KnnFactorModel(index, position, embedder)
        else:
            raise ValueError(f"unknown sub-model kind {kind!r}")
    return MultiLabelModel(vectorizer=vectorizer, submodels=submodels, config=config)
