"""Evaluation metrics: per-class precision/recall/F1, macro-F1, confusion.

Conventions, pinned once here and relied on everywhere else:

* precision is 0 when a class is never predicted (no false positives
  either), recall is 0 when a class has no gold samples, and F1 is 0
  when precision and recall are both 0;
* macro-F1 averages F1 over the *entire* supplied label set, including
  classes with zero support, so restricting or extending the label set
  changes the score and must be an explicit choice;
* confusion matrices are indexed gold-row, predicted-column, in the
  order of the supplied label set, and row normalization turns each row
  into the conditional distribution of predictions given the gold class
  (all-zero rows are left at zero rather than divided).

The functions are generic over hashable label values so they work for
dialect labels, language codes, and plain strings alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import EmptyInput, LabelOutsideSet, LengthMismatch, ValidationError

Label = Hashable


@dataclass(frozen=True)
class PerClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


def _check_pairs(
    gold: Sequence[Label], predicted: Sequence[Label], label_set: Sequence[Label]
) -> tuple[Label, ...]:
    labels = tuple(label_set)
    if not labels:
        raise EmptyInput("label set must be non-empty")
    if len(set(labels)) != len(labels):
        raise ValidationError("label set contains duplicates")
    if len(gold) != len(predicted):
        raise LengthMismatch(
            f"{len(gold)} gold labels vs {len(predicted)} predictions"
        )
    if not gold:
        raise EmptyInput("cannot score zero samples")
    known = set(labels)
    for kind, sequence in (("gold", gold), ("predicted", predicted)):
        for value in sequence:
            if value not in known:
                raise LabelOutsideSet(f"{kind} label {value!r} is outside the label set")
    return labels


def per_class_metrics(
    gold: Sequence[Label],
    predicted: Sequence[Label],
    label_set: Sequence[Label],
) -> dict[Label, PerClassMetrics]:
    """Precision, recall, F1, and support for every label in the set."""
    labels = _check_pairs(gold, predicted, label_set)
    tp: dict[Label, int] = {label: 0 for label in labels}
    fp: dict[Label, int] = {label: 0 for label in labels}
    fn: dict[Label, int] = {label: 0 for label in labels}
    support: dict[Label, int] = {label: 0 for label in labels}
    for g, p in zip(gold, predicted):
        support[g] += 1
        if g == p:
            tp[g] += 1
        else:
            fn[g] += 1
            fp[p] += 1

    out: dict[Label, PerClassMetrics] = {}
    for label in labels:
        predicted_count = tp[label] + fp[label]
        gold_count = tp[label] + fn[label]
        precision = tp[label] / predicted_count if predicted_count else 0.0
        recall = tp[label] / gold_count if gold_count else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        out[label] = PerClassMetrics(precision, recall, f1, support[label])
    return out


def macro_f1(
    gold: Sequence[Label],
    predicted: Sequence[Label],
    label_set: Sequence[Label],
) -> float:
    """Unweighted mean of per-class F1 over the full label set."""
    per_class = per_class_metrics(gold, predicted, label_set)
    return sum(m.f1 for m in per_class.values()) / len(per_class)


def accuracy(gold: Sequence[Label], predicted: Sequence[Label]) -> float:
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    if not gold:
        raise EmptyInput("cannot score zero samples")
    return sum(g == p for g, p in zip(gold, predicted)) / len(gold)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Count matrix, gold classes as rows and predicted classes as columns."""

    labels: tuple[Label, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        expected = (len(self.labels), len(self.labels))
        if self.counts.shape != expected:
            raise ValidationError(
                f"confusion matrix shape {self.counts.shape} does not match "
                f"{len(self.labels)} labels"
            )

    def count(self, gold: Label, predicted: Label) -> int:
        i = self.labels.index(gold)
        j = self.labels.index(predicted)
        return int(self.counts[i, j])

    def row_normalized(self) -> np.ndarray:
        return row_normalize(self.counts)

    def to_rows(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.counts]


def confusion(
    gold: Sequence[Label],
    predicted: Sequence[Label],
    label_set: Sequence[Label],
) -> ConfusionMatrix:
    labels = _check_pairs(gold, predicted, label_set)
    index: Mapping[Label, int] = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, predicted):
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def row_normalize(counts: np.ndarray) -> np.ndarray:
    """Scale each row to sum to 1; all-zero rows stay all-zero."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 2:
        raise ValidationError("row normalization expects a 2-d matrix")
    if (counts < 0).any():
        raise ValidationError("confusion counts must be non-negative")
    sums = counts.sum(axis=1, keepdims=True)
    safe = np.where(sums == 0, 1.0, sums)
    normalized = counts / safe
    return normalized
