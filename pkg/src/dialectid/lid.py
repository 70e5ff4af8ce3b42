"""Stage one of the cascade: route each sentence to EN, ES, or PT.

Three interchangeable routers share one interface:

* :class:`OracleLid` answers from the gold labels, for isolating
  stage-two behavior from routing errors;
* :class:`NgramLidModel` is the built-in trainable baseline (hashed
  character 1-3 grams, softmax classifier);
* :class:`ExternalLid` replays a prediction table produced by any
  outside language identifier, keyed by sample id.

Whatever the router, its decision is final: a sentence routed to the
wrong language is scored against that wrong language's dialect labels
downstream, so routing mistakes surface as end-task errors instead of
being silently corrected.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Sample
from .errors import (
    EmptyInput,
    EmptyText,
    ExternalAdapterError,
    SingleClassInput,
    UnknownSampleId,
    ValidationError,
)
from .features import HashedNgramVectorizer, predict_proba, train_softmax
from .labels import LanguageCode, parse_language
from .metrics import accuracy

#: Canonical routing order; probability vectors follow it.
LANGUAGES: tuple[LanguageCode, ...] = (
    LanguageCode.EN,
    LanguageCode.ES,
    LanguageCode.PT,
)

_LANG_INDEX = {language: i for i, language in enumerate(LANGUAGES)}


class LidModel:
    """Interface: map a sample to a language and a probability triple."""

    kind: str = "abstract"

    def route(self, sample: Sample) -> tuple[LanguageCode, np.ndarray]:
        raise NotImplementedError


class OracleLid(LidModel):
    """Perfect router backed by a sample-id to gold-language table."""

    kind = "oracle"

    def __init__(self, table: dict[str, LanguageCode]):
        if not table:
            raise EmptyInput("oracle router needs at least one sample")
        self.table = dict(table)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "OracleLid":
        table: dict[str, LanguageCode] = {}
        for sample in samples:
            if sample.gold is None:
                raise ValidationError(
                    f"sample {sample.id!r} is unlabeled; the oracle router "
                    "needs gold labels"
                )
            table[sample.id] = sample.gold.language
        return cls(table)

    def route(self, sample: Sample) -> tuple[LanguageCode, np.ndarray]:
        language = self.table.get(sample.id)
        if language is None:
            raise UnknownSampleId(
                f"oracle router has no language for sample {sample.id!r}"
            )
        probs = np.zeros(len(LANGUAGES))
        probs[_LANG_INDEX[language]] = 1.0
        return language, probs


@dataclass(frozen=True)
class LidEpochRecord:
    """One training epoch: objective value plus accuracies."""

    epoch: int
    loss: float
    train_accuracy: float
    validation_accuracy: float | None


class NgramLidModel(LidModel):
    """Trainable router over hashed character n-gram features."""

    kind = "ngram"

    def __init__(
        self,
        vectorizer: HashedNgramVectorizer,
        weights: np.ndarray,
        history: tuple[LidEpochRecord, ...] = (),
    ):
        if weights.shape != (vectorizer.dim, len(LANGUAGES)):
            raise ValidationError(
                f"weights shape {weights.shape} does not match "
                f"({vectorizer.dim}, {len(LANGUAGES)})"
            )
        self.vectorizer = vectorizer
        self.weights = weights
        self.history = tuple(history)

    def predict_text(self, text: str) -> tuple[LanguageCode, np.ndarray]:
        x = self.vectorizer.transform([text])
        probs = predict_proba(x, self.weights)[0]
        return LANGUAGES[int(np.argmax(probs))], probs

    def route(self, sample: Sample) -> tuple[LanguageCode, np.ndarray]:
        return self.predict_text(sample.text)


class ExternalLid(LidModel):
    """Replay router decisions made outside the toolkit.

    The exchange file is headerless UTF-8 CSV, one row per sample:
    ``id,language,p_en,p_es,p_pt``.  The language column is trusted as
    the router's decision; probabilities are carried through for
    reporting and must be a distribution to three decimals' tolerance.
    """

    kind = "external"

    def __init__(self, table: dict[str, tuple[LanguageCode, np.ndarray]]):
        if not table:
            raise ExternalAdapterError("external router table is empty")
        self.table = dict(table)

    @classmethod
    def load(cls, path: str | Path) -> "ExternalLid":
        table: dict[str, tuple[LanguageCode, np.ndarray]] = {}
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as handle:
            for row_number, row in enumerate(csv.reader(handle), start=1):
                if not row:
                    continue
                if len(row) != 5:
                    raise ExternalAdapterError(
                        f"{path.name} row {row_number}: expected 5 fields "
                        f"(id,language,p_en,p_es,p_pt), got {len(row)}"
                    )
                sample_id = row[0].strip()
                try:
                    language = parse_language(row[1])
                    probs = np.array([float(v) for v in row[2:5]])
                except (ValidationError, ValueError) as error:
                    raise ExternalAdapterError(
                        f"{path.name} row {row_number}: {error}"
                    ) from error
                if (probs < 0).any() or abs(float(probs.sum()) - 1.0) > 1e-3:
                    raise ExternalAdapterError(
                        f"{path.name} row {row_number}: probabilities must be "
                        "non-negative and sum to 1"
                    )
                if sample_id in table:
                    raise ExternalAdapterError(
                        f"{path.name} row {row_number}: duplicate id {sample_id!r}"
                    )
                table[sample_id] = (language, probs)
        return cls(table)

    def route(self, sample: Sample) -> tuple[LanguageCode, np.ndarray]:
        entry = self.table.get(sample.id)
        if entry is None:
            raise UnknownSampleId(
                f"external router has no row for sample {sample.id!r}"
            )
        return entry


def predict_language(model: LidModel, text: str | Sample) -> tuple[LanguageCode, np.ndarray]:
    """Route one input; accepts raw text for text-backed routers."""
    if isinstance(text, Sample):
        return model.route(text)
    if not text or not text.strip():
        raise EmptyText("cannot route empty text")
    return model.route(Sample(id="-", text=text))


def train_lid(
    train: Sequence[Sample],
    validation: Sequence[Sample] | None = None,
    *,
    epochs: int = 30,
    learning_rate: float = 0.5,
    weight_decay: float = 0.0,
    batch_size: int = 0,
    seed: int = 0,
    orders: Sequence[int] = (1, 2, 3),
    hash_dim: int = 2 ** 15,
    max_text_length: int = 256,
    verbose: bool = False,
) -> NgramLidModel:
    """Train the n-gram router on labeled samples of all three languages.

    The language target is each sample's gold label language.  Defaults
    are full-batch descent, step 0.5, 30 epochs, orders 1-3 hashed into
    2**15 buckets.  The per-epoch curve (objective, train accuracy, and
    validation accuracy when a validation split is given) is recorded on
    the returned model's ``history``.
    """
    if not train:
        raise EmptyInput("cannot train a router on zero samples")
    languages = {sample.language for sample in train}
    if len(languages) < 2:
        raise SingleClassInput(
            "router training needs at least two languages, got "
            + ", ".join(sorted(l.value for l in languages))
        )
    vectorizer = HashedNgramVectorizer(
        orders=orders, dim=hash_dim, max_text_length=max_text_length
    )
    x = vectorizer.transform([sample.text for sample in train])
    y = np.array([_LANG_INDEX[sample.language] for sample in train], dtype=np.int64)
    gold_train = [sample.language for sample in train]
    x_val = y_val = None
    if validation:
        x_val = vectorizer.transform([sample.text for sample in validation])
        gold_val = [sample.language for sample in validation]

    history: list[LidEpochRecord] = []

    def on_epoch(epoch: int, weights: np.ndarray, loss: float) -> None:
        train_pred = [
            LANGUAGES[i] for i in np.argmax(predict_proba(x, weights), axis=1)
        ]
        train_acc = accuracy(gold_train, train_pred)
        val_acc = None
        if x_val is not None:
            val_pred = [
                LANGUAGES[i] for i in np.argmax(predict_proba(x_val, weights), axis=1)
            ]
            val_acc = accuracy(gold_val, val_pred)
        history.append(LidEpochRecord(epoch, loss, train_acc, val_acc))
        if verbose:
            line = f"  lid epoch {epoch:3d}  loss {loss:.4f}  train acc {train_acc:.4f}"
            if val_acc is not None:
                line += f"  val acc {val_acc:.4f}"
            print(line)

    weights = train_softmax(
        x,
        y,
        n_classes=len(LANGUAGES),
        epochs=epochs,
        learning_rate=learning_rate,
        weight_decay=weight_decay,
        batch_size=batch_size,
        seed=seed,
        on_epoch=on_epoch,
    )
    return NgramLidModel(vectorizer, weights, tuple(history))


def evaluate_lid(model: LidModel, samples: Sequence[Sample]) -> float:
    """Routing accuracy against the samples' gold label languages."""
    if not samples:
        raise EmptyInput("cannot evaluate a router on zero samples")
    gold = [sample.language for sample in samples]
    predicted = [model.route(sample)[0] for sample in samples]
    return accuracy(gold, predicted)


def write_lid_predictions(
    path: str | Path, model: LidModel, samples: Sequence[Sample]
) -> Path:
    """Write routing decisions in the external exchange format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for sample in samples:
            language, probs = model.route(sample)
            writer.writerow(
                [sample.id, language.value] + [f"{p:.6f}" for p in probs]
            )
    return path
