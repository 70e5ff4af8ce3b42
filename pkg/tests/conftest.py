from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dialectid import (
    LANGUAGES,
    DialectLabel,
    LanguageCode,
    Sample,
    Track,
    TrainingConfig,
    train_dialect,
    train_lid,
)
from dialectid.synthetic import SyntheticConfig, make_synthetic


@pytest.fixture(scope="session")
def small_synth():
    """Compact corpus shared by the fast integration tests."""
    dataset, vocabulary = make_synthetic(
        SyntheticConfig(seed=7, train_per_class=40, validation_per_class=15,
                        test_per_class=15)
    )
    return dataset, vocabulary


@pytest.fixture(scope="session")
def trained(small_synth):
    """Router and per-language dialect models over the compact corpus."""
    dataset, _ = small_synth
    lid = train_lid(dataset.train, dataset.validation, epochs=8)
    config = TrainingConfig.ngram_profile()
    # Full-batch descent consumes no randomness, so a second seed would
    # reproduce the same weights; undertraining makes a weaker rival.
    weak_config = dataclasses.replace(config, epochs=2, learning_rate=0.05)
    models = {}
    weak_models = {}
    histories = {}
    for language in LANGUAGES:
        subset = dataset.subset(language)
        models[language], histories[language] = train_dialect(
            subset.train, subset.validation, language=language, config=config
        )
        weak_models[language], _ = train_dialect(
            subset.train, subset.validation, language=language, config=weak_config
        )
    return {
        "dataset": dataset,
        "lid": lid,
        "models": models,
        "weak_models": weak_models,
        "histories": histories,
    }


def label(raw: str) -> DialectLabel:
    from dialectid import parse_label

    return parse_label(raw)


@pytest.fixture
def en_us():
    return label("EN-US")


@pytest.fixture
def tiny_samples():
    """Four labeled samples, two languages, for contract tests."""
    return [
        Sample(id="a1", text="the borough thing", gold=label("EN-US")),
        Sample(id="a2", text="rather a colour", gold=label("EN-GB")),
        Sample(id="b1", text="el niño pequeño", gold=label("ES-ES")),
        Sample(id="b2", text="che vos sabés", gold=label("ES-AR")),
    ]
