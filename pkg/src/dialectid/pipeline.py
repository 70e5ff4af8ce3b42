"""The two-stage cascade and the model-combination grid search.

A pipeline pairs one language router with one dialect classifier per
language.  Prediction is route-then-classify: the router picks the
language, that language's classifier picks the final label, and the
router's mistakes propagate (a sentence routed to the wrong language is
classified among the wrong language's labels and scored accordingly).

The grid search takes candidate classifier pools per language, builds
every combination (the full Cartesian product), and scores each
combined pipeline on a multilingual validation split, so the selected
per-language models are judged by the one number that matters: the
cascade's own macro-F1.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Sample
from .dialect import DialectModel
from .errors import (
    BatchPredictionError,
    DialectIdError,
    EmptyInput,
    LanguageMismatch,
    MissingLanguage,
    TrackMismatch,
    ValidationError,
)
from .labels import DialectLabel, LanguageCode, Track
from .lid import LANGUAGES, LidModel
from .metrics import macro_f1


@dataclass(frozen=True)
class PipelinePrediction:
    """One sentence's trip through the cascade."""

    sample_id: str
    routed_language: LanguageCode
    predicted: DialectLabel
    lid_probabilities: np.ndarray
    dialect_probabilities: np.ndarray


@dataclass(frozen=True)
class Pipeline:
    """A router plus one dialect classifier per language."""

    lid: LidModel
    dialect_models: Mapping[LanguageCode, DialectModel]
    track: Track

    def model_for(self, language: LanguageCode) -> DialectModel:
        return self.dialect_models[language]


def compose(
    lid: LidModel,
    dialect_models: Mapping[LanguageCode, DialectModel],
    track: Track = Track.TRACK1,
) -> Pipeline:
    """Validate and assemble a cascade.

    Every language needs exactly one classifier, each classifier must
    actually be for the language it is filed under, and all classifiers
    must answer the requested track's label set.
    """
    for language in LANGUAGES:
        model = dialect_models.get(language)
        if model is None:
            raise MissingLanguage(f"no dialect model for {language.value}")
        if model.language is not language:
            raise LanguageMismatch(
                f"model {model.name!r} classifies {model.language.value}, "
                f"filed under {language.value}"
            )
        if model.track is not track:
            raise TrackMismatch(
                f"model {model.name!r} answers {model.track}, pipeline wants {track}"
            )
    extra = set(dialect_models) - set(LANGUAGES)
    if extra:
        raise ValidationError(f"unexpected dialect model keys: {sorted(extra, key=str)}")
    return Pipeline(
        lid=lid,
        dialect_models={language: dialect_models[language] for language in LANGUAGES},
        track=track,
    )


def predict(pipeline: Pipeline, sample: Sample) -> PipelinePrediction:
    """Route one sample, then classify it within the routed language."""
    language, lid_probs = pipeline.lid.route(sample)
    label, dialect_probs = pipeline.model_for(language).predict(sample)
    return PipelinePrediction(
        sample_id=sample.id,
        routed_language=language,
        predicted=label,
        lid_probabilities=lid_probs,
        dialect_probabilities=dialect_probs,
    )


def predict_batch(
    pipeline: Pipeline, samples: Sequence[Sample]
) -> list[PipelinePrediction]:
    """Predict every sample; collect per-sample failures, not just the first.

    Raises :class:`BatchPredictionError` carrying (index, id, error) for
    each failing sample if any failed.
    """
    predictions: list[PipelinePrediction] = []
    failures: list[tuple[int, str, Exception]] = []
    for index, sample in enumerate(samples):
        try:
            predictions.append(predict(pipeline, sample))
        except DialectIdError as error:
            failures.append((index, sample.id, error))
    if failures:
        raise BatchPredictionError(failures)
    return predictions


def evaluate_pipeline(
    pipeline: Pipeline, samples: Sequence[Sample]
) -> float:
    """End-task macro-F1 of the cascade over the pipeline's label set."""
    if not samples:
        raise EmptyInput("cannot evaluate a pipeline on zero samples")
    gold = []
    for sample in samples:
        if sample.gold is None:
            raise ValidationError(f"sample {sample.id!r} is unlabeled")
        gold.append(sample.gold)
    predicted = [predict(pipeline, sample).predicted for sample in samples]
    return macro_f1(gold, predicted, pipeline.track.label_set)


@dataclass(frozen=True)
class ComboResult:
    """One grid-search cell: a model per language and its cascade score."""

    combination: dict[LanguageCode, str]
    validation_macro_f1: float
    test_macro_f1: float | None = None

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(self.combination[language] for language in LANGUAGES)


def grid_search(
    candidates: Mapping[LanguageCode, Mapping[str, DialectModel]],
    lid: LidModel,
    validation: Sequence[Sample],
    track: Track = Track.TRACK1,
) -> list[ComboResult]:
    """Score every per-language model combination as a full cascade.

    ``candidates`` maps each language to a pool of named models (the
    names are what the result table reports).  Every combination in the
    Cartesian product is composed with the shared router and scored on
    the multilingual validation split.  Results come back sorted by
    validation macro-F1, best first, with ties broken by the combination
    name tuple in (EN, ES, PT) order so the ranking is reproducible.
    """
    if not validation:
        raise EmptyInput("grid search needs a non-empty validation split")
    pools: list[list[tuple[str, DialectModel]]] = []
    for language in LANGUAGES:
        pool = candidates.get(language)
        if not pool:
            raise MissingLanguage(f"no candidate models for {language.value}")
        pools.append(sorted(pool.items()))

    results: list[ComboResult] = []
    for picks in itertools.product(*pools):
        combination = {
            language: name for language, (name, _) in zip(LANGUAGES, picks)
        }
        pipeline = compose(
            lid,
            {language: model for language, (_, model) in zip(LANGUAGES, picks)},
            track,
        )
        results.append(
            ComboResult(
                combination=combination,
                validation_macro_f1=evaluate_pipeline(pipeline, validation),
            )
        )
    results.sort(key=lambda result: (-result.validation_macro_f1, result.key))
    return results


def write_predictions(
    path: str | Path,
    predictions: Sequence[PipelinePrediction],
    track: Track = Track.TRACK1,
    include_probabilities: bool = False,
) -> Path:
    """Write cascade predictions as UTF-8 CSV.

    Base columns are ``id,routed_language,predicted_label``.  With
    probabilities enabled, the router's three probabilities and one
    column per track label follow; label columns outside the routed
    language are left empty rather than zero-filled, because the cascade
    never scored them.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["id", "routed_language", "predicted_label"]
    if include_probabilities:
        header += [f"p_{language.value.lower()}" for language in LANGUAGES]
        header += [f"p_{label.canonical}" for label in track.label_set]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for prediction in predictions:
            row = [
                prediction.sample_id,
                prediction.routed_language.value,
                prediction.predicted.canonical,
            ]
            if include_probabilities:
                row += [f"{p:.6f}" for p in prediction.lid_probabilities]
                routed = track.labels_for(prediction.routed_language)
                by_label = dict(zip(routed, prediction.dialect_probabilities))
                for label in track.label_set:
                    row.append(
                        f"{by_label[label]:.6f}" if label in by_label else ""
                    )
            writer.writerow(row)
    return path
