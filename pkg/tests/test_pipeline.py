from __future__ import annotations

import csv

import pytest

from dialectid.corpus import Sample
from dialectid.dialect import adapt_to_track2
from dialectid.errors import (
    BatchPredictionError,
    EmptyInput,
    LanguageMismatch,
    MissingLanguage,
    TrackMismatch,
    UnknownSampleId,
    ValidationError,
)
from dialectid.labels import LanguageCode, Track, parse_label
from dialectid.lid import LANGUAGES, OracleLid
from dialectid.pipeline import (
    compose,
    evaluate_pipeline,
    grid_search,
    predict,
    predict_batch,
    write_predictions,
)


class TestCompose:
    def test_happy_path(self, trained):
        pipeline = compose(trained["lid"], trained["models"])
        assert pipeline.track is Track.TRACK1
        assert set(pipeline.dialect_models) == set(LANGUAGES)

    def test_missing_language(self, trained):
        incomplete = dict(trained["models"])
        incomplete.pop(LanguageCode.PT)
        with pytest.raises(MissingLanguage):
            compose(trained["lid"], incomplete)

    def test_model_filed_under_the_wrong_language(self, trained):
        shuffled = dict(trained["models"])
        shuffled[LanguageCode.EN], shuffled[LanguageCode.ES] = (
            shuffled[LanguageCode.ES],
            shuffled[LanguageCode.EN],
        )
        with pytest.raises(LanguageMismatch):
            compose(trained["lid"], shuffled)

    def test_track_mismatch(self, trained):
        with pytest.raises(TrackMismatch):
            compose(trained["lid"], trained["models"], Track.TRACK2)
        narrowed = {
            language: adapt_to_track2(model)
            for language, model in trained["models"].items()
        }
        pipeline = compose(trained["lid"], narrowed, Track.TRACK2)
        assert pipeline.track is Track.TRACK2

    def test_extra_keys_are_rejected(self, trained):
        padded = dict(trained["models"])
        padded["extra"] = trained["models"][LanguageCode.EN]
        with pytest.raises(ValidationError, match="unexpected"):
            compose(trained["lid"], padded)


class TestPredict:
    def test_routes_then_classifies(self, trained):
        dataset = trained["dataset"]
        pipeline = compose(trained["lid"], trained["models"])
        sample = dataset.test[0]
        prediction = predict(pipeline, sample)
        assert prediction.sample_id == sample.id
        assert prediction.predicted.language is prediction.routed_language
        routed_labels = pipeline.track.labels_for(prediction.routed_language)
        assert len(prediction.dialect_probabilities) == len(routed_labels)
        assert prediction.lid_probabilities.sum() == pytest.approx(1.0)

    def test_routing_errors_propagate_to_the_final_label(self, trained):
        # Force a wrong route with a lying oracle: the EN sentence must
        # come back with a Spanish label, never a corrected English one.
        dataset = trained["dataset"]
        english = dataset.subset(LanguageCode.EN).test[0]
        liar = OracleLid({english.id: LanguageCode.ES})
        pipeline = compose(liar, trained["models"])
        prediction = predict(pipeline, english)
        assert prediction.routed_language is LanguageCode.ES
        assert prediction.predicted.language is LanguageCode.ES
        assert prediction.predicted != english.gold

    def test_wrong_route_costs_macro_f1(self, trained):
        dataset = trained["dataset"]
        samples = dataset.test
        honest = OracleLid.from_samples(samples)
        table = {s.id: s.language for s in samples}
        flipped = samples[0]
        table[flipped.id] = (
            LanguageCode.ES
            if flipped.language is not LanguageCode.ES
            else LanguageCode.PT
        )
        liar = OracleLid(table)
        honest_f1 = evaluate_pipeline(compose(honest, trained["models"]), samples)
        lying_f1 = evaluate_pipeline(compose(liar, trained["models"]), samples)
        assert lying_f1 < honest_f1


class TestPredictBatch:
    def test_collects_every_failure(self, trained):
        dataset = trained["dataset"]
        known = dataset.test[:3]
        router = OracleLid.from_samples(known)
        pipeline = compose(router, trained["models"])
        strangers = [Sample(id="ghost-1", text="t"), Sample(id="ghost-2", text="t")]
        batch = [known[0], strangers[0], known[1], strangers[1], known[2]]
        with pytest.raises(BatchPredictionError) as excinfo:
            predict_batch(pipeline, batch)
        failures = excinfo.value.failures
        assert [(index, sample_id) for index, sample_id, _ in failures] == [
            (1, "ghost-1"),
            (3, "ghost-2"),
        ]
        assert all(isinstance(error, UnknownSampleId) for _, _, error in failures)

    def test_clean_batch_returns_in_order(self, trained):
        dataset = trained["dataset"]
        pipeline = compose(trained["lid"], trained["models"])
        predictions = predict_batch(pipeline, dataset.test[:5])
        assert [p.sample_id for p in predictions] == [s.id for s in dataset.test[:5]]


class TestEvaluate:
    def test_oracle_routed_cascade_scores_well(self, trained):
        dataset = trained["dataset"]
        router = OracleLid.from_samples(dataset.test)
        pipeline = compose(router, trained["models"])
        assert evaluate_pipeline(pipeline, dataset.test) >= 0.9

    def test_contracts(self, trained):
        pipeline = compose(trained["lid"], trained["models"])
        with pytest.raises(EmptyInput):
            evaluate_pipeline(pipeline, [])
        with pytest.raises(ValidationError):
            evaluate_pipeline(pipeline, [Sample(id="u", text="t")])


class TestGridSearch:
    def test_two_candidates_per_language_yield_eight_rows(self, trained):
        dataset = trained["dataset"]
        candidates = {
            language: {"full": model, "weak": trained["weak_models"][language]}
            for language, model in trained["models"].items()
        }
        results = grid_search(
            candidates, trained["lid"], dataset.validation
        )
        assert len(results) == 8
        keys = {result.key for result in results}
        assert len(keys) == 8  # full Cartesian product, no repeats
        names = {"full", "weak"}
        assert all(set(key) <= names for key in keys)
        scores = [result.validation_macro_f1 for result in results]
        assert scores == sorted(scores, reverse=True)

    def test_ties_rank_by_combination_names(self, trained):
        # Same model under two names: every cell scores identically, so
        # the ranking must fall back to the (EN, ES, PT) name tuple.
        dataset = trained["dataset"]
        candidates = {
            language: {"a": model, "b": model}
            for language, model in trained["models"].items()
        }
        results = grid_search(candidates, trained["lid"], dataset.validation)
        assert [result.key for result in results] == sorted(
            result.key for result in results
        )

    def test_contracts(self, trained):
        dataset = trained["dataset"]
        candidates = {
            language: {"full": model} for language, model in trained["models"].items()
        }
        with pytest.raises(EmptyInput):
            grid_search(candidates, trained["lid"], [])
        del candidates[LanguageCode.PT]
        with pytest.raises(MissingLanguage):
            grid_search(candidates, trained["lid"], dataset.validation)


class TestWritePredictions:
    def test_basic_columns(self, trained, tmp_path):
        dataset = trained["dataset"]
        pipeline = compose(trained["lid"], trained["models"])
        predictions = predict_batch(pipeline, dataset.test[:4])
        path = write_predictions(tmp_path / "pred.csv", predictions)
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["id", "routed_language", "predicted_label"]
        assert len(rows) == 5
        assert rows[1][0] == dataset.test[0].id
        assert rows[1][1] in {"EN", "ES", "PT"}

    def test_probability_columns_follow_the_canonical_label_order(
        self, trained, tmp_path
    ):
        dataset = trained["dataset"]
        pipeline = compose(trained["lid"], trained["models"])
        predictions = predict_batch(pipeline, dataset.test[:6])
        path = write_predictions(
            tmp_path / "pred.csv", predictions, include_probabilities=True
        )
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == [
            "id", "routed_language", "predicted_label",
            "p_en", "p_es", "p_pt",
            "p_EN-US", "p_EN-GB", "p_EN",
            "p_ES-ES", "p_ES-AR", "p_ES",
            "p_PT-PT", "p_PT-BR", "p_PT",
        ]
        for row in rows[1:]:
            routed = row[1]
            lid_probs = [float(v) for v in row[3:6]]
            assert sum(lid_probs) == pytest.approx(1.0, abs=1e-5)
            label_cells = dict(zip(rows[0][6:], row[6:]))
            for column, cell in label_cells.items():
                if column[2:].startswith(routed):
                    assert cell != ""
                else:
                    assert cell == ""
            filled = [float(v) for v in row[6:] if v != ""]
            assert len(filled) == 3
            assert sum(filled) == pytest.approx(1.0, abs=1e-5)

    def test_empty_batch_writes_a_header_only_file(self, trained, tmp_path):
        path = write_predictions(tmp_path / "pred.csv", [])
        assert path.read_text() == "id,routed_language,predicted_label\n"

    def test_track2_probability_header_lists_six_labels(self, trained, tmp_path):
        narrowed = {
            language: adapt_to_track2(model)
            for language, model in trained["models"].items()
        }
        pipeline = compose(trained["lid"], narrowed, Track.TRACK2)
        dataset = trained["dataset"]
        predictions = predict_batch(pipeline, dataset.test[:2])
        path = write_predictions(
            tmp_path / "pred.csv",
            predictions,
            track=Track.TRACK2,
            include_probabilities=True,
        )
        with open(path, newline="") as handle:
            header = next(csv.reader(handle))
        assert header[6:] == [
            "p_EN-US", "p_EN-GB", "p_ES-ES", "p_ES-AR", "p_PT-PT", "p_PT-BR"
        ]
