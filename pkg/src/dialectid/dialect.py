"""Stage two of the cascade: per-language dialect classifiers.

Each classifier sees only one language's samples and chooses among that
language's labels: the two national varieties plus, on the nine-label
task, the common variety.

Training follows a fixed protocol regardless of backbone: after every
epoch the model is snapshotted and its train and validation macro-F1
recorded; when all epochs finish, the checkpoint with the best
validation macro-F1 (earliest epoch on ties) becomes the returned
model.  The final-epoch weights are never used unless they happen to
win that comparison.

Two backbones implement the protocol.  The built-in baseline trains a
softmax classifier over hashed character 2-4 grams.  The external
backbone replays per-epoch prediction files produced by any outside
model (see :func:`ingest_external_dialect` for the file convention), so
heavyweight fine-tuned models can ride the same checkpoint selection
and evaluation without this package importing their frameworks.
"""

from __future__ import annotations

import csv
import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ResampleStrategy, Sample, resample
from .errors import (
    ConfigError,
    EmptyHistory,
    EmptyInput,
    EmptyText,
    ExternalAdapterError,
    LabelOutsideSet,
    NotThreeWay,
    SingleClassInput,
    UnknownSampleId,
    ValidationError,
)
from .features import HashedNgramVectorizer, predict_proba, train_softmax
from .labels import DialectLabel, LanguageCode, Track
from .metrics import macro_f1, per_class_metrics


@dataclass(frozen=True)
class TrainingConfig:
    """Optimization settings for one dialect-model training run.

    The defaults are the fine-tuning profile used with large pretrained
    backbones: 20 epochs, learning rate 1e-6, weight decay 1e-6, batch
    size 8.  The built-in n-gram baseline wants a much larger step and
    full-batch descent; use :meth:`ngram_profile` for that.

    ``batch_size=0`` means full batch.  ``resample`` is ``None`` (leave
    the class imbalance alone, the default), ``"oversample"``, or
    ``"weighted"``.  ``max_text_length`` is the character budget per
    sample before featurization.
    """

    epochs: int = 20
    learning_rate: float = 1e-6
    weight_decay: float = 1e-6
    batch_size: int = 8
    seed: int = 0
    max_text_length: int = 256
    resample: str | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if self.weight_decay < 0:
            raise ConfigError("weight decay must be non-negative")
        if self.batch_size < 0:
            raise ConfigError("batch size must be 0 (full batch) or positive")
        if self.max_text_length < 1:
            raise ConfigError("max text length must be positive")
        if self.resample is not None and self.resample not in ResampleStrategy.ALL:
            raise ConfigError(
                f"resample must be one of {ResampleStrategy.ALL} or omitted"
            )

    @classmethod
    def ngram_profile(cls, seed: int = 0, resample: str | None = None) -> "TrainingConfig":
        """Full-batch profile for the hashed n-gram baseline."""
        return cls(
            epochs=20,
            learning_rate=0.3,
            weight_decay=0.0,
            batch_size=0,
            seed=seed,
            resample=resample,
        )


@dataclass(frozen=True)
class CheckpointRecord:
    """One epoch's snapshot and scores.

    ``payload`` is whatever the backbone needs to rebuild the model at
    this epoch: a weight matrix for the baseline, a prediction-file path
    for external runs.  ``loss`` and ``train_macro_f1`` may be missing
    for external runs that only report validation predictions.
    """

    epoch: int
    validation_macro_f1: float
    train_macro_f1: float | None = None
    loss: float | None = None
    payload: object = field(default=None, repr=False, compare=False)


def select_checkpoint(history: Sequence[CheckpointRecord]) -> CheckpointRecord:
    """Best validation macro-F1; earliest epoch wins ties."""
    if not history:
        raise EmptyHistory("cannot select a checkpoint from an empty history")
    return max(history, key=lambda record: (record.validation_macro_f1, -record.epoch))


class DialectModel:
    """Interface: one language's dialect classifier.

    ``label_set`` is the canonical-order tuple of labels the model
    chooses among; probability vectors follow that order.
    """

    kind: str = "abstract"

    def __init__(self, language: LanguageCode, track: Track, name: str):
        self.language = language
        self.track = track
        self.name = name

    @property
    def label_set(self) -> tuple[DialectLabel, ...]:
        return self.track.labels_for(self.language)

    def proba_for(self, sample: Sample) -> np.ndarray:
        raise NotImplementedError

    def predict(self, sample: Sample) -> tuple[DialectLabel, np.ndarray]:
        probs = self.proba_for(sample)
        return self.label_set[int(np.argmax(probs))], probs


class NgramDialectModel(DialectModel):
    """Built-in baseline: softmax over hashed character n-grams."""

    kind = "ngram"

    def __init__(
        self,
        language: LanguageCode,
        track: Track,
        vectorizer: HashedNgramVectorizer,
        weights: np.ndarray,
        name: str = "",
    ):
        super().__init__(language, track, name or f"{language.value.lower()}-{track}-ngram")
        expected = (vectorizer.dim, len(self.label_set))
        if weights.shape != expected:
            raise ValidationError(
                f"weights shape {weights.shape} does not match {expected}"
            )
        self.vectorizer = vectorizer
        self.weights = weights

    def proba_text(self, text: str) -> np.ndarray:
        x = self.vectorizer.transform([text])
        return predict_proba(x, self.weights)[0]

    def proba_for(self, sample: Sample) -> np.ndarray:
        return self.proba_text(sample.text)


class ExternalDialectModel(DialectModel):
    """Replays an outside model's predictions, keyed by sample id."""

    kind = "external"

    def __init__(
        self,
        language: LanguageCode,
        track: Track,
        table: dict[str, np.ndarray],
        name: str = "",
        epoch: int | None = None,
    ):
        super().__init__(
            language, track, name or f"{language.value.lower()}-{track}-external"
        )
        if not table:
            raise ExternalAdapterError("external prediction table is empty")
        self.table = dict(table)
        self.epoch = epoch

    def proba_for(self, sample: Sample) -> np.ndarray:
        probs = self.table.get(sample.id)
        if probs is None:
            raise UnknownSampleId(
                f"external model {self.name!r} has no prediction for sample "
                f"{sample.id!r}"
            )
        return probs


class AdaptationMode(enum.Enum):
    """How a three-label model answers a two-label question.

    RENORMALIZE drops the common label and rescales the two national
    probabilities to sum to one, so every prediction is a valid national
    label.  ARGMAX_FULL keeps the full three-way decision; a common
    prediction then scores as an error against any national gold label.
    """

    RENORMALIZE = "renormalize"
    ARGMAX_FULL = "argmax-full"


class RestrictedDialectModel(DialectModel):
    """A three-way model viewed through the two-label national task."""

    kind = "restricted"

    def __init__(self, base: DialectModel, mode: AdaptationMode = AdaptationMode.RENORMALIZE):
        if base.track is not Track.TRACK1:
            raise NotThreeWay(
                f"model {base.name!r} is already restricted to national labels"
            )
        if len(base.label_set) != 3:
            raise NotThreeWay(
                f"model {base.name!r} does not cover the full three-label set"
            )
        super().__init__(base.language, Track.TRACK2, f"{base.name}+{mode.value}")
        self.base = base
        self.mode = mode
        # Positions of the two national labels inside the base label set.
        self._national = tuple(
            base.label_set.index(label) for label in self.label_set
        )

    def proba_for(self, sample: Sample) -> np.ndarray:
        full = self.base.proba_for(sample)
        pair = np.asarray([full[i] for i in self._national], dtype=np.float64)
        total = float(pair.sum())
        if total <= 0.0:
            # The base model put everything on the common label; no
            # evidence either way, so fall back to uniform.
            return np.full(len(pair), 1.0 / len(pair))
        return pair / total

    def predict(self, sample: Sample) -> tuple[DialectLabel, np.ndarray]:
        if self.mode is AdaptationMode.RENORMALIZE:
            return super().predict(sample)
        full = self.base.proba_for(sample)
        return self.base.label_set[int(np.argmax(full))], self.proba_for(sample)


def adapt_to_track2(
    base: DialectModel, mode: AdaptationMode = AdaptationMode.RENORMALIZE
) -> RestrictedDialectModel:
    """View a nine-label-task model as a six-label-task model."""
    return RestrictedDialectModel(base, mode)


def predict_dialect(
    model: DialectModel, text: str | Sample
) -> tuple[DialectLabel, np.ndarray]:
    """Classify one input; accepts raw text for text-backed models."""
    if isinstance(text, Sample):
        return model.predict(text)
    if not text or not text.strip():
        raise EmptyText("cannot classify empty text")
    return model.predict(Sample(id="-", text=text))


def evaluate_dialect(model: DialectModel, samples: Sequence[Sample]) -> float:
    """Macro-F1 of a model on labeled samples of its own language.

    For a restricted model in ARGMAX_FULL mode the prediction space is
    the base three-label set, so per-class scores are computed there and
    averaged over just the two national labels.
    """
    if not samples:
        raise EmptyInput("cannot evaluate on zero samples")
    gold = []
    for sample in samples:
        if sample.gold is None:
            raise ValidationError(f"sample {sample.id!r} is unlabeled")
        gold.append(sample.gold)
    predicted = [model.predict(sample)[0] for sample in samples]
    if isinstance(model, RestrictedDialectModel) and model.mode is AdaptationMode.ARGMAX_FULL:
        per_class = per_class_metrics(gold, predicted, model.base.label_set)
        return sum(per_class[label].f1 for label in model.label_set) / len(model.label_set)
    return macro_f1(gold, predicted, model.label_set)


def _check_language_split(
    samples: Sequence[Sample], language: LanguageCode, track: Track, split: str
) -> list[DialectLabel]:
    labels = track.labels_for(language)
    gold: list[DialectLabel] = []
    for sample in samples:
        if sample.gold is None:
            raise ValidationError(f"{split} sample {sample.id!r} is unlabeled")
        if sample.gold not in labels:
            raise LabelOutsideSet(
                f"{split} sample {sample.id!r} labeled {sample.gold}, outside "
                f"the {language.value} {track} label set"
            )
        gold.append(sample.gold)
    return gold


def train_dialect(
    train: Sequence[Sample],
    validation: Sequence[Sample],
    *,
    language: LanguageCode,
    track: Track = Track.TRACK1,
    config: TrainingConfig | None = None,
    orders: Sequence[int] = (2, 3, 4),
    hash_dim: int = 2 ** 16,
    name: str = "",
    verbose: bool = False,
) -> tuple[NgramDialectModel, list[CheckpointRecord]]:
    """Train the baseline dialect classifier for one language.

    Returns the model at the selected checkpoint together with the full
    epoch history.  Train and validation macro-F1 are measured on the
    splits as given; oversampling (when configured) affects only what
    the optimizer sees.
    """
    config = config or TrainingConfig.ngram_profile()
    if not train:
        raise EmptyInput("cannot train a dialect model on zero samples")
    if not validation:
        raise EmptyInput(
            "checkpoint selection needs a non-empty validation split"
        )
    label_set = track.labels_for(language)
    label_index = {label: i for i, label in enumerate(label_set)}
    gold_train = _check_language_split(train, language, track, "train")
    gold_val = _check_language_split(validation, language, track, "validation")
    if len(set(gold_train)) < 2:
        raise SingleClassInput(
            f"{language.value} training data covers only one dialect label"
        )

    fit_samples: Sequence[Sample] = train
    sample_weight = None
    if config.resample == ResampleStrategy.OVERSAMPLE:
        fit_samples = resample(train, ResampleStrategy.OVERSAMPLE, config.seed)
    elif config.resample == ResampleStrategy.WEIGHTED:
        sample_weight = np.asarray(
            resample(train, ResampleStrategy.WEIGHTED), dtype=np.float64
        )

    vectorizer = HashedNgramVectorizer(
        orders=orders, dim=hash_dim, max_text_length=config.max_text_length
    )
    x_fit = vectorizer.transform([sample.text for sample in fit_samples])
    y_fit = np.array(
        [label_index[sample.gold] for sample in fit_samples], dtype=np.int64
    )
    x_train = vectorizer.transform([sample.text for sample in train])
    x_val = vectorizer.transform([sample.text for sample in validation])

    history: list[CheckpointRecord] = []

    def on_epoch(epoch: int, weights: np.ndarray, loss: float) -> None:
        train_pred = [
            label_set[i] for i in np.argmax(predict_proba(x_train, weights), axis=1)
        ]
        val_pred = [
            label_set[i] for i in np.argmax(predict_proba(x_val, weights), axis=1)
        ]
        record = CheckpointRecord(
            epoch=epoch,
            validation_macro_f1=macro_f1(gold_val, val_pred, label_set),
            train_macro_f1=macro_f1(gold_train, train_pred, label_set),
            loss=loss,
            payload=weights.copy(),
        )
        history.append(record)
        if verbose:
            print(
                f"  {language.value} epoch {epoch:3d}  loss {loss:.4f}  "
                f"train F1 {record.train_macro_f1:.4f}  "
                f"val F1 {record.validation_macro_f1:.4f}"
            )

    train_softmax(
        x_fit,
        y_fit,
        n_classes=len(label_set),
        epochs=config.epochs,
        learning_rate=config.learning_rate,
        weight_decay=config.weight_decay,
        batch_size=config.batch_size,
        seed=config.seed,
        sample_weight=sample_weight,
        on_epoch=on_epoch,
    )

    selected = select_checkpoint(history)
    if verbose:
        print(
            f"  {language.value}: selected epoch {selected.epoch} "
            f"(val F1 {selected.validation_macro_f1:.4f})"
        )
    model = NgramDialectModel(
        language=language,
        track=track,
        vectorizer=vectorizer,
        weights=np.asarray(selected.payload),
        name=name,
    )
    return model, history


_EPOCH_FILE = re.compile(r"^epoch-(\d+)\.csv$")


def read_prediction_table(
    path: str | Path, n_labels: int
) -> dict[str, np.ndarray]:
    """Read one ``id,p_1,...,p_k`` prediction file into an id-keyed table."""
    path = Path(path)
    table: dict[str, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row_number, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 1 + n_labels:
                raise ExternalAdapterError(
                    f"{path.name} row {row_number}: expected id plus "
                    f"{n_labels} probabilities, got {len(row)} fields"
                )
            sample_id = row[0].strip()
            if sample_id in table:
                raise ExternalAdapterError(
                    f"{path.name} row {row_number}: duplicate id {sample_id!r}"
                )
            try:
                probs = np.array([float(v) for v in row[1:]], dtype=np.float64)
            except ValueError as error:
                raise ExternalAdapterError(
                    f"{path.name} row {row_number}: {error}"
                ) from error
            if (probs < 0).any() or abs(float(probs.sum()) - 1.0) > 1e-3:
                raise ExternalAdapterError(
                    f"{path.name} row {row_number}: probabilities must be "
                    "non-negative and sum to 1"
                )
            table[sample_id] = probs
    if not table:
        raise ExternalAdapterError(f"{path.name} holds no predictions")
    return table


def ingest_external_dialect(
    predictions_dir: str | Path,
    *,
    language: LanguageCode,
    track: Track = Track.TRACK1,
    validation: Sequence[Sample],
    train: Sequence[Sample] | None = None,
    name: str = "",
) -> tuple[ExternalDialectModel, list[CheckpointRecord]]:
    """Run checkpoint selection over an external model's epoch files.

    ``predictions_dir`` must hold one headerless UTF-8 CSV per epoch,
    named ``epoch-1.csv`` through ``epoch-<E>.csv`` with no gaps.  Each
    row is ``id,p_1,...,p_k`` with probabilities in the canonical label
    order for the model's language and track.  Every file must cover the
    whole validation split (that is what checkpoint selection is scored
    on); covering the train split as well is optional and only adds the
    train curve to the history.  The returned model replays the selected
    epoch's rows, so it can also carry test-split predictions.
    """
    predictions_dir = Path(predictions_dir)
    if not predictions_dir.is_dir():
        raise ExternalAdapterError(f"{predictions_dir} is not a directory")
    if not validation:
        raise EmptyInput("checkpoint selection needs a non-empty validation split")
    gold_val = _check_language_split(validation, language, track, "validation")
    gold_train = (
        _check_language_split(train, language, track, "train") if train else []
    )

    by_epoch: dict[int, Path] = {}
    for entry in predictions_dir.iterdir():
        match = _EPOCH_FILE.match(entry.name)
        if match:
            epoch = int(match.group(1))
            if epoch in by_epoch:
                raise ExternalAdapterError(f"duplicate files for epoch {epoch}")
            by_epoch[epoch] = entry
    if not by_epoch:
        raise ExternalAdapterError(
            f"{predictions_dir} holds no epoch-<n>.csv prediction files"
        )
    epochs = sorted(by_epoch)
    if epochs != list(range(1, len(epochs) + 1)):
        raise ExternalAdapterError(
            f"epoch files must be contiguous from 1, found {epochs}"
        )

    label_set = track.labels_for(language)
    history: list[CheckpointRecord] = []
    for epoch in epochs:
        table = read_prediction_table(by_epoch[epoch], len(label_set))
        missing = [s.id for s in validation if s.id not in table]
        if missing:
            raise ExternalAdapterError(
                f"epoch-{epoch}.csv misses {len(missing)} validation ids "
                f"(first: {missing[0]!r})"
            )
        val_pred = [
            label_set[int(np.argmax(table[s.id]))] for s in validation
        ]
        train_f1 = None
        if train and all(s.id in table for s in train):
            train_pred = [
                label_set[int(np.argmax(table[s.id]))] for s in train
            ]
            train_f1 = macro_f1(gold_train, train_pred, label_set)
        history.append(
            CheckpointRecord(
                epoch=epoch,
                validation_macro_f1=macro_f1(gold_val, val_pred, label_set),
                train_macro_f1=train_f1,
                payload=by_epoch[epoch],
            )
        )

    selected = select_checkpoint(history)
    model = ExternalDialectModel(
        language=language,
        track=track,
        table=read_prediction_table(Path(selected.payload), len(label_set)),
        name=name,
        epoch=selected.epoch,
    )
    return model, history
