"""Hashed character n-gram features and the shared softmax trainer.

Both built-in text classifiers (the language router baseline and the
per-language dialect baseline) share the same machinery: character
n-grams hashed into a fixed-width binary presence vector, and a
multinomial logistic model trained by gradient descent on the softmax
cross-entropy objective.

Hashing uses CRC-32 of the UTF-8 bytes, not Python's builtin ``hash``,
so feature indices are stable across processes and interpreter runs.
Weights start at zero, so training is deterministic given the data
order, the configuration, and the seed.
"""

from __future__ import annotations

import zlib
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

from .errors import ConfigError, EmptyText, ValidationError


class HashedNgramVectorizer:
    """Map text to a sparse binary vector of hashed character n-grams."""

    def __init__(
        self,
        orders: Sequence[int] = (1, 2, 3),
        dim: int = 2 ** 15,
        max_text_length: int = 256,
    ):
        orders = tuple(int(n) for n in orders)
        if not orders or any(n < 1 for n in orders):
            raise ConfigError("n-gram orders must be positive integers")
        if dim < 2:
            raise ConfigError("hash dimension must be at least 2")
        if max_text_length < 1:
            raise ConfigError("max text length must be positive")
        self.orders = orders
        self.dim = int(dim)
        self.max_text_length = int(max_text_length)

    def feature_indices(self, text: str) -> list[int]:
        """Sorted unique hash buckets for one text (binary presence)."""
        if not text or not text.strip():
            raise EmptyText("cannot featurize empty text")
        clipped = text[: self.max_text_length]
        buckets: set[int] = set()
        for order in self.orders:
            if len(clipped) < order:
                continue
            for start in range(len(clipped) - order + 1):
                gram = clipped[start : start + order]
                buckets.add(zlib.crc32(gram.encode("utf-8")) % self.dim)
        return sorted(buckets)

    def transform(self, texts: Sequence[str]) -> sparse.csr_matrix:
        """Stack texts into a CSR matrix of shape (len(texts), dim)."""
        indptr = [0]
        indices: list[int] = []
        for text in texts:
            row = self.feature_indices(text)
            indices.extend(row)
            indptr.append(len(indices))
        data = np.ones(len(indices), dtype=np.float64)
        return sparse.csr_matrix(
            (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
            shape=(len(texts), self.dim),
        )

    def config(self) -> dict:
        return {
            "orders": list(self.orders),
            "dim": self.dim,
            "max_text_length": self.max_text_length,
        }

    @classmethod
    def from_config(cls, config: dict) -> "HashedNgramVectorizer":
        return cls(
            orders=tuple(config["orders"]),
            dim=config["dim"],
            max_text_length=config["max_text_length"],
        )


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted for numerical stability."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def predict_proba(x: sparse.csr_matrix, weights: np.ndarray) -> np.ndarray:
    return softmax(x @ weights)


def cross_entropy(
    x: sparse.csr_matrix,
    y: np.ndarray,
    weights: np.ndarray,
    weight_decay: float = 0.0,
    sample_weight: np.ndarray | None = None,
) -> float:
    """Mean softmax cross-entropy plus the L2 penalty term.

    This is the exact objective the trainer descends, so the recorded
    per-epoch losses are comparable across configurations.
    """
    scores = x @ weights
    per_sample = logsumexp(scores, axis=1) - scores[np.arange(len(y)), y]
    if sample_weight is None:
        data_loss = float(per_sample.mean())
    else:
        data_loss = float((per_sample * sample_weight).sum() / sample_weight.sum())
    penalty = 0.5 * weight_decay * float((weights ** 2).sum())
    return data_loss + penalty


def train_softmax(
    x: sparse.csr_matrix,
    y: np.ndarray,
    n_classes: int,
    *,
    epochs: int,
    learning_rate: float,
    weight_decay: float = 0.0,
    batch_size: int = 0,
    seed: int = 0,
    sample_weight: np.ndarray | None = None,
    on_epoch: Callable[[int, np.ndarray, float], None] | None = None,
) -> np.ndarray:
    """Gradient descent on softmax cross-entropy; returns (dim, K) weights.

    ``batch_size=0`` (or any value >= the sample count) means full-batch
    descent, which is fully deterministic with no randomness consumed.
    Otherwise samples are shuffled each epoch with a generator seeded
    once from ``seed`` and visited in mini-batches.

    After each epoch ``on_epoch(epoch, weights, loss)`` is invoked with
    the 1-based epoch number, the updated weights, and the mean objective
    measured on each batch just before its update (so epoch 1's loss
    reflects the zero-initialized model on its first batch).
    """
    n = x.shape[0]
    if n == 0:
        raise ValidationError("cannot train on zero samples")
    if len(y) != n:
        raise ValidationError("feature matrix and label vector disagree on length")
    if epochs < 1:
        raise ConfigError("epochs must be at least 1")
    if learning_rate <= 0:
        raise ConfigError("learning rate must be positive")
    if weight_decay < 0:
        raise ConfigError("weight decay must be non-negative")
    if sample_weight is not None and len(sample_weight) != n:
        raise ValidationError("sample weights and labels disagree on length")

    y = np.asarray(y, dtype=np.int64)
    weights = np.zeros((x.shape[1], n_classes), dtype=np.float64)
    full_batch = batch_size <= 0 or batch_size >= n
    rng = np.random.default_rng(seed)

    for epoch in range(1, epochs + 1):
        if full_batch:
            order = np.arange(n)
            bounds = [(0, n)]
        else:
            order = rng.permutation(n)
            bounds = [(start, min(start + batch_size, n))
                      for start in range(0, n, batch_size)]
        loss_sum = 0.0
        for start, stop in bounds:
            batch = order[start:stop]
            xb = x[batch]
            yb = y[batch]
            wb = sample_weight[batch] if sample_weight is not None else None
            loss_sum += cross_entropy(xb, yb, weights, weight_decay, wb) * len(batch)
            probs = predict_proba(xb, weights)
            probs[np.arange(len(yb)), yb] -= 1.0
            if wb is not None:
                probs *= (wb / wb.mean())[:, None]
            grad = (xb.T @ probs) / len(batch) + weight_decay * weights
            weights -= learning_rate * grad
        if on_epoch is not None:
            on_epoch(epoch, weights, loss_sum / n)
    return weights
