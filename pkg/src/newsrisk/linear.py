"""Binary linear classifiers trained from scratch.

Logistic regression minimizes mean log-loss + (l2/2)*||w||^2 by full-batch
gradient descent; the SVM minimizes mean hinge loss with the same regularizer
via a seeded stochastic subgradient schedule with step 1/(l2*t). The bias is
never regularized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vectorize import SparseVector


class SingleClassError(ValueError):
    """Training data has only one class; use a constant-prediction fallback."""


class DimensionError(ValueError):
    """Feature dimension does not match the model."""


@dataclass(frozen=True)
class Hyperparameters:
    l2_lambda: float = 1e-3
    epochs: int = 200
    learning_rate: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.l2_lambda <= 0:
            raise ValueError("l2_lambda must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str  # "logistic" or "hinge"
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    loss_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("logistic", "hinge"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        object.__setattr__(self, "bias", float(self.bias))
        if not np.isfinite(self.weights).all() or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


def _to_dense(X: list[SparseVector]) -> np.ndarray:
    if not X:
        raise ValueError("empty feature list")
    dim = X[0].dim
    if any(x.dim != dim for x in X):
        raise DimensionError("inconsistent feature dimensions")
    dense = np.zeros((len(X), dim))
    for row, x in enumerate(X):
        if x.indices:
            dense[row, list(x.indices)] = x.values
    return dense


def _check_labels(X: list[SparseVector], y: list[bool]) -> np.ndarray:
    if len(X) != len(y) or not X:
        raise ValueError("X and y must be aligned and non-empty")
    arr = np.asarray([bool(v) for v in y])
    if arr.all() or not arr.any():
        raise SingleClassError(
            "labels are single-class; train a constant-prediction fallback instead"
        )
    return arr


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    exp_z = np.exp(z[~pos])
    out[~pos] = exp_z / (1.0 + exp_z)
    return out


def logistic_loss(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> float:
    """Mean log-loss plus (l2/2)*||w||^2, in the overflow-safe form."""
    z = X @ weights + bias
    per_sample = np.logaddexp(0.0, z) - y * z
    return float(per_sample.mean() + 0.5 * l2_lambda * weights @ weights)


def logistic_gradient(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[np.ndarray, float]:
    """Gradient of logistic_loss w.r.t. (weights, bias)."""
    z = X @ weights + bias
    residual = _sigmoid(z) - y
    grad_w = X.T @ residual / len(y) + l2_lambda * weights
    grad_b = float(residual.mean())
    return grad_w, grad_b


def train_logistic(
    X: list[SparseVector], y: list[bool], hyper: Hyperparameters = Hyperparameters()
) -> LinearModel:
    """Full-batch gradient descent from zero weights; deterministic."""
    labels = _check_labels(X, y).astype(float)
    dense = _to_dense(X)
    weights = np.zeros(dense.shape[1])
    bias = 0.0
    history = [logistic_loss(weights, bias, dense, labels, hyper.l2_lambda)]
    for _ in range(hyper.epochs):
        grad_w, grad_b = logistic_gradient(weights, bias, dense, labels, hyper.l2_lambda)
        weights -= hyper.learning_rate * grad_w
        bias -= hyper.learning_rate * grad_b
        history.append(logistic_loss(weights, bias, dense, labels, hyper.l2_lambda))
    return LinearModel(
        weights=weights,
        bias=bias,
        kind="logistic",
        hyper=hyper,
        loss_history=tuple(history),
    )


def hinge_objective(
    weights: np.ndarray, bias: float, X: np.ndarray, y_signed: np.ndarray, l2_lambda: float
) -> float:
    """Mean hinge loss plus (l2/2)*||w||^2 with labels in {-1, +1}."""
    margins = y_signed * (X @ weights + bias)
    return float(
        np.maximum(0.0, 1.0 - margins).mean() + 0.5 * l2_lambda * weights @ weights
    )


def train_svm(
    X: list[SparseVector], y: list[bool], hyper: Hyperparameters = Hyperparameters()
) -> LinearModel:
    """Stochastic subgradient descent on the hinge objective, step 1/(l2*t)."""
    labels = _check_labels(X, y)
    signed = np.where(labels, 1.0, -1.0)
    dense = _to_dense(X)
    n = len(signed)
    weights = np.zeros(dense.shape[1])
    bias = 0.0
    rng = np.random.default_rng(hyper.seed)
    history = [hinge_objective(weights, bias, dense, signed, hyper.l2_lambda)]
    step = 0
    for _ in range(hyper.epochs):
        for _ in range(n):
            step += 1
            eta = 1.0 / (hyper.l2_lambda * step)
            i = int(rng.integers(0, n))
            margin = signed[i] * (dense[i] @ weights + bias)
            weights *= 1.0 - eta * hyper.l2_lambda
            if margin < 1.0:
                weights += eta * signed[i] * dense[i]
                # unregularized intercept takes the gentler 1/t step
                bias += eta * hyper.l2_lambda * signed[i]
        history.append(hinge_objective(weights, bias, dense, signed, hyper.l2_lambda))
    return LinearModel(
        weights=weights,
        bias=bias,
        kind="hinge",
        hyper=hyper,
        loss_history=tuple(history),
    )


def predict_linear(
    model: LinearModel, x: SparseVector, threshold: float = 0.5
) -> tuple[float, bool]:
    """Score and thresholded label for one sample.

    Logistic models return a probability and compare it to ``threshold`` with
    the >= rule; hinge models return the raw margin and compare it to zero.
    """
    if x.dim != model.dim:
        raise DimensionError(f"feature dim {x.dim} != model dim {model.dim}")
    z = model.bias
    for index, value in zip(x.indices, x.values):
        z += model.weights[index] * value
    z = float(z)
    if model.kind == "logistic":
        score = float(_sigmoid(np.asarray([z]))[0])
        return score, score >= threshold
    return z, z >= 0.0
