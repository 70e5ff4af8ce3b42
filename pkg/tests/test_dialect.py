from __future__ import annotations

import csv
import random

import numpy as np
import pytest

from dialectid.corpus import Sample, filter_track
from dialectid.dialect import (
    AdaptationMode,
    CheckpointRecord,
    DialectModel,
    ExternalDialectModel,
    TrainingConfig,
    adapt_to_track2,
    evaluate_dialect,
    ingest_external_dialect,
    predict_dialect,
    select_checkpoint,
    train_dialect,
)
from dialectid.errors import (
    ConfigError,
    EmptyHistory,
    EmptyInput,
    ExternalAdapterError,
    LabelOutsideSet,
    NotThreeWay,
    SingleClassInput,
    UnknownSampleId,
)
from dialectid.labels import LanguageCode, Track, parse_label
from oracles import scan_best_checkpoint


def _record(epoch, f1):
    return CheckpointRecord(epoch=epoch, validation_macro_f1=f1)


class TestCheckpointSelection:
    def test_best_f1_wins(self):
        history = [_record(1, 0.4), _record(2, 0.9), _record(3, 0.7)]
        assert select_checkpoint(history).epoch == 2

    def test_earliest_epoch_wins_ties(self):
        history = [_record(1, 0.5), _record(2, 0.9), _record(3, 0.9)]
        assert select_checkpoint(history).epoch == 2

    def test_final_epoch_is_not_privileged(self):
        history = [_record(1, 0.9), _record(2, 0.2)]
        assert select_checkpoint(history).epoch == 1

    def test_empty_history_is_an_error(self):
        with pytest.raises(EmptyHistory):
            select_checkpoint([])

    def test_matches_a_linear_scan_on_random_histories(self):
        rng = random.Random(2024)
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]  # coarse grid engineers ties
        for _ in range(100):
            history = [
                _record(epoch, rng.choice(grid))
                for epoch in range(1, rng.randint(1, 30) + 1)
            ]
            assert select_checkpoint(history) is scan_best_checkpoint(history)


class TestTrainingConfig:
    def test_finetune_defaults(self):
        config = TrainingConfig()
        assert config.epochs == 20
        assert config.learning_rate == pytest.approx(1e-6)
        assert config.weight_decay == pytest.approx(1e-6)
        assert config.batch_size == 8

    def test_ngram_profile_is_full_batch(self):
        config = TrainingConfig.ngram_profile(seed=3)
        assert config.epochs == 20
        assert config.batch_size == 0
        assert config.seed == 3

    def test_validation(self):
        with pytest.raises(ConfigError):
            TrainingConfig(epochs=0)
        with pytest.raises(ConfigError):
            TrainingConfig(learning_rate=-0.1)
        with pytest.raises(ConfigError):
            TrainingConfig(resample="bogus")


class TestTraining:
    def test_trained_model_fits_the_synthetic_task(self, small_synth):
        dataset, _ = small_synth
        subset = dataset.subset(LanguageCode.ES)
        model, history = train_dialect(
            subset.train, subset.validation, language=LanguageCode.ES
        )
        assert len(history) == 20
        assert [record.epoch for record in history] == list(range(1, 21))
        assert evaluate_dialect(model, subset.test) >= 0.9

    def test_returned_weights_are_the_selected_checkpoint(self, small_synth):
        dataset, _ = small_synth
        subset = dataset.subset(LanguageCode.EN)
        model, history = train_dialect(
            subset.train, subset.validation, language=LanguageCode.EN
        )
        selected = select_checkpoint(history)
        assert np.array_equal(model.weights, np.asarray(selected.payload))

    def test_history_scores_are_measured_on_the_given_splits(self, small_synth):
        # Oversampling changes what the optimizer sees, not the metric
        # populations: supports in the history must match the raw splits.
        dataset, _ = small_synth
        subset = dataset.subset(LanguageCode.PT)
        skewed = subset.train[: len(subset.train) - 20]
        config = TrainingConfig.ngram_profile(resample="oversample")
        model, history = train_dialect(
            skewed, subset.validation, language=LanguageCode.PT, config=config
        )
        plain_model, _ = train_dialect(
            skewed, subset.validation, language=LanguageCode.PT
        )
        assert history[-1].train_macro_f1 is not None
        assert evaluate_dialect(model, subset.test) >= 0.8
        assert model.weights.shape == plain_model.weights.shape

    def test_weighted_resampling_trains(self, small_synth):
        dataset, _ = small_synth
        subset = dataset.subset(LanguageCode.EN)
        config = TrainingConfig.ngram_profile(resample="weighted")
        model, _ = train_dialect(
            subset.train, subset.validation, language=LanguageCode.EN, config=config
        )
        assert evaluate_dialect(model, subset.test) >= 0.8

    def test_input_contracts(self, small_synth):
        dataset, _ = small_synth
        subset = dataset.subset(LanguageCode.EN)
        with pytest.raises(EmptyInput):
            train_dialect([], subset.validation, language=LanguageCode.EN)
        with pytest.raises(EmptyInput):
            train_dialect(subset.train, [], language=LanguageCode.EN)
        spanish = dataset.subset(LanguageCode.ES).train
        with pytest.raises(LabelOutsideSet):
            train_dialect(spanish, subset.validation, language=LanguageCode.EN)
        just_us = [s for s in subset.train if s.gold == parse_label("EN-US")]
        with pytest.raises(SingleClassInput):
            train_dialect(just_us, subset.validation, language=LanguageCode.EN)

    def test_track2_training_uses_two_labels(self, small_synth):
        dataset, _ = small_synth
        national = filter_track(dataset, Track.TRACK2)
        subset = national.subset(LanguageCode.ES)
        model, _ = train_dialect(
            subset.train,
            subset.validation,
            language=LanguageCode.ES,
            track=Track.TRACK2,
        )
        assert len(model.label_set) == 2
        assert evaluate_dialect(model, subset.test) >= 0.9


class _TableModel(DialectModel):
    """Test double with hand-set probability vectors per sample id."""

    kind = "table"

    def __init__(self, language, track, probs):
        super().__init__(language, track, "table")
        self._probs = {k: np.asarray(v, dtype=np.float64) for k, v in probs.items()}

    def proba_for(self, sample):
        return self._probs[sample.id]


def _en_probs(us, gb, common):
    return {"x": [us, gb, common]}


def test_renormalize_rescales_the_national_pair():
    base = _TableModel(LanguageCode.EN, Track.TRACK1, _en_probs(0.2, 0.3, 0.5))
    restricted = adapt_to_track2(base)
    sample = Sample(id="x", text="t")
    label, probs = restricted.predict(sample)
    assert probs.tolist() == pytest.approx([0.4, 0.6])
    assert label == parse_label("EN-GB")
    assert restricted.track is Track.TRACK2
    assert [str(l) for l in restricted.label_set] == ["EN-US", "EN-GB"]


def test_all_common_mass_falls_back_to_uniform():
    base = _TableModel(LanguageCode.EN, Track.TRACK1, _en_probs(0.0, 0.0, 1.0))
    restricted = adapt_to_track2(base)
    label, probs = restricted.predict(Sample(id="x", text="t"))
    assert probs.tolist() == [0.5, 0.5]
    assert label == parse_label("EN-US")  # canonical-order argmax tie-break


def test_argmax_full_keeps_the_three_way_decision():
    base = _TableModel(LanguageCode.EN, Track.TRACK1, _en_probs(0.2, 0.3, 0.5))
    restricted = adapt_to_track2(base, AdaptationMode.ARGMAX_FULL)
    label, probs = restricted.predict(Sample(id="x", text="t"))
    assert label == parse_label("EN")  # the common label can win
    assert probs.tolist() == pytest.approx([0.4, 0.6])


def test_argmax_full_common_predictions_score_as_errors():
    # Two gold-national samples; the base model answers common on one.
    probs = {
        "a": [0.6, 0.1, 0.3],  # -> EN-US, correct
        "b": [0.1, 0.2, 0.7],  # -> EN, wrong against any national gold
    }
    base = _TableModel(LanguageCode.EN, Track.TRACK1, probs)
    samples = [
        Sample(id="a", text="t", gold=parse_label("EN-US")),
        Sample(id="b", text="t", gold=parse_label("EN-GB")),
    ]
    strict = evaluate_dialect(adapt_to_track2(base, AdaptationMode.ARGMAX_FULL), samples)
    lenient = evaluate_dialect(adapt_to_track2(base), samples)
    # EN-US: P=1, R=1, F1=1.  EN-GB: predicted never, F1=0.  Mean: 0.5.
    assert strict == pytest.approx(0.5)
    # Renormalizing turns b's 2:1 national ratio into a correct EN-GB call.
    assert lenient == pytest.approx(1.0)


def test_restriction_requires_a_full_three_way_base(small_synth):
    dataset, _ = small_synth
    national = filter_track(dataset, Track.TRACK2).subset(LanguageCode.ES)
    model, _ = train_dialect(
        national.train,
        national.validation,
        language=LanguageCode.ES,
        track=Track.TRACK2,
    )
    with pytest.raises(NotThreeWay):
        adapt_to_track2(model)


def test_predict_dialect_accepts_text_or_sample(small_synth, trained):
    dataset, _ = small_synth
    model = trained["models"][LanguageCode.EN]
    sample = dataset.subset(LanguageCode.EN).test[0]
    by_sample = predict_dialect(model, sample)
    by_text = predict_dialect(model, sample.text)
    assert by_sample[0] == by_text[0]
    assert np.array_equal(by_sample[1], by_text[1])


class TestExternalIngestion:
    @staticmethod
    def _write_epoch(directory, epoch, rows):
        path = directory / f"epoch-{epoch}.csv"
        with open(path, "w", newline="") as handle:
            csv.writer(handle, lineterminator="\n").writerows(rows)
        return path

    @staticmethod
    def _validation():
        return [
            Sample(id="v1", text="t", gold=parse_label("ES-ES")),
            Sample(id="v2", text="t", gold=parse_label("ES-AR")),
        ]

    def test_selects_the_best_epoch_and_replays_it(self, tmp_path):
        # Epoch 1 gets v2 wrong; epoch 2 is perfect on both national
        # labels; epoch 3 regresses.  The zero-support common label
        # contributes a 0 term to every macro, capping epoch 2 at 2/3.
        self._write_epoch(
            tmp_path, 1, [["v1", "0.8", "0.1", "0.1"], ["v2", "0.7", "0.2", "0.1"]]
        )
        self._write_epoch(
            tmp_path, 2, [["v1", "0.9", "0.05", "0.05"], ["v2", "0.1", "0.8", "0.1"]]
        )
        self._write_epoch(
            tmp_path, 3, [["v1", "0.2", "0.2", "0.6"], ["v2", "0.2", "0.6", "0.2"]]
        )
        model, history = ingest_external_dialect(
            tmp_path, language=LanguageCode.ES, validation=self._validation()
        )
        assert [record.epoch for record in history] == [1, 2, 3]
        assert model.epoch == 2
        assert history[0].validation_macro_f1 == pytest.approx(2 / 9)
        assert history[1].validation_macro_f1 == pytest.approx(2 / 3)
        assert history[2].validation_macro_f1 == pytest.approx(1 / 3)
        label, probs = model.predict(self._validation()[1])
        assert label == parse_label("ES-AR")
        assert probs.tolist() == pytest.approx([0.1, 0.8, 0.1])

    def test_extra_rows_ride_into_the_selected_model(self, tmp_path):
        self._write_epoch(
            tmp_path,
            1,
            [
                ["v1", "1.0", "0.0", "0.0"],
                ["v2", "0.0", "1.0", "0.0"],
                ["test-7", "0.0", "0.0", "1.0"],
            ],
        )
        model, _ = ingest_external_dialect(
            tmp_path, language=LanguageCode.ES, validation=self._validation()
        )
        label, _ = model.predict(Sample(id="test-7", text="t"))
        assert label == parse_label("ES")

    def test_train_coverage_is_optional(self, tmp_path):
        train = [Sample(id="t1", text="t", gold=parse_label("ES-ES"))]
        self._write_epoch(
            tmp_path, 1, [["v1", "1.0", "0.0", "0.0"], ["v2", "0.0", "1.0", "0.0"]]
        )
        _, history = ingest_external_dialect(
            tmp_path,
            language=LanguageCode.ES,
            validation=self._validation(),
            train=train,
        )
        assert history[0].train_macro_f1 is None
        assert history[0].validation_macro_f1 == pytest.approx(2 / 3)

    def test_missing_validation_rows_are_an_error(self, tmp_path):
        self._write_epoch(tmp_path, 1, [["v1", "1.0", "0.0", "0.0"]])
        with pytest.raises(ExternalAdapterError, match="misses 1 validation"):
            ingest_external_dialect(
                tmp_path, language=LanguageCode.ES, validation=self._validation()
            )

    def test_epoch_files_must_be_contiguous_from_one(self, tmp_path):
        self._write_epoch(
            tmp_path, 2, [["v1", "1.0", "0.0", "0.0"], ["v2", "0.0", "1.0", "0.0"]]
        )
        with pytest.raises(ExternalAdapterError, match="contiguous"):
            ingest_external_dialect(
                tmp_path, language=LanguageCode.ES, validation=self._validation()
            )

    def test_no_epoch_files_is_an_error(self, tmp_path):
        (tmp_path / "notes.txt").write_text("not a prediction file\n")
        with pytest.raises(ExternalAdapterError, match="no epoch"):
            ingest_external_dialect(
                tmp_path, language=LanguageCode.ES, validation=self._validation()
            )

    def test_bad_probability_rows_are_rejected(self, tmp_path):
        self._write_epoch(
            tmp_path, 1, [["v1", "0.9", "0.2", "0.2"], ["v2", "0.0", "1.0", "0.0"]]
        )
        with pytest.raises(ExternalAdapterError, match="sum to 1"):
            ingest_external_dialect(
                tmp_path, language=LanguageCode.ES, validation=self._validation()
            )

    def test_wrong_field_count_is_rejected(self, tmp_path):
        self._write_epoch(tmp_path, 1, [["v1", "1.0", "0.0"], ["v2", "0.0", "1.0"]])
        with pytest.raises(ExternalAdapterError, match="expected id plus 3"):
            ingest_external_dialect(
                tmp_path, language=LanguageCode.ES, validation=self._validation()
            )

    def test_unknown_sample_raises_at_prediction_time(self, tmp_path):
        self._write_epoch(
            tmp_path, 1, [["v1", "1.0", "0.0", "0.0"], ["v2", "0.0", "1.0", "0.0"]]
        )
        model, _ = ingest_external_dialect(
            tmp_path, language=LanguageCode.ES, validation=self._validation()
        )
        with pytest.raises(UnknownSampleId):
            model.predict(Sample(id="stranger", text="t"))

    def test_restricting_an_external_model(self, tmp_path):
        self._write_epoch(
            tmp_path, 1, [["v1", "0.5", "0.1", "0.4"], ["v2", "0.1", "0.5", "0.4"]]
        )
        model, _ = ingest_external_dialect(
            tmp_path, language=LanguageCode.ES, validation=self._validation()
        )
        restricted = adapt_to_track2(model)
        _, probs = restricted.predict(Sample(id="v1", text="t"))
        assert probs.tolist() == pytest.approx([0.5 / 0.6, 0.1 / 0.6])


def test_external_model_rejects_an_empty_table():
    with pytest.raises(ExternalAdapterError):
        ExternalDialectModel(LanguageCode.EN, Track.TRACK1, {})


def test_evaluate_requires_labels_and_samples(trained, small_synth):
    dataset, _ = small_synth
    model = trained["models"][LanguageCode.EN]
    with pytest.raises(EmptyInput):
        evaluate_dialect(model, [])
