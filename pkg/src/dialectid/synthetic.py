"""Seeded synthetic corpus for end-to-end checks without real data.

Three pseudo-languages are built from disjoint syllable inventories, so
stage one has a real signal to learn; within each language, each of the
three varieties owns a marker vocabulary that no other class shares, so
stage two has one too.  Every sentence is a shuffled mix of its
language's filler words and its class's marker words.

Everything is drawn from one ``random.Random(seed)``, so a config maps
to exactly one corpus, byte for byte.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import Sample, SplitDataset, write_samples
from .errors import ConfigError
from .labels import TRACK1_LABELS, DialectLabel, LanguageCode, Track

# Deliberately non-overlapping syllable inventories.
_SYLLABLES: dict[LanguageCode, tuple[str, ...]] = {
    LanguageCode.EN: (
        "th", "wick", "shire", "ough", "ing", "worth", "ham", "ton",
        "bridge", "stone", "wood", "field", "burn", "dale", "ley", "ford",
    ),
    LanguageCode.ES: (
        "ña", "llo", "cita", "rro", "que", "gua", "cho", "zal",
        "mira", "vela", "juna", "pique", "senda", "lumbre", "teja", "brisa",
    ),
    LanguageCode.PT: (
        "ção", "ão", "nho", "lhe", "eiro", "inha", "saud", "guard",
        "ilha", "mares", "fado", "veiga", "coim", "minho", "porto", "azul",
    ),
}


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 0
    train_per_class: int = 300
    validation_per_class: int = 60
    test_per_class: int = 60
    markers_per_class: int = 12
    fillers_per_language: int = 30

    def __post_init__(self) -> None:
        for name in (
            "train_per_class", "validation_per_class", "test_per_class",
            "markers_per_class", "fillers_per_language",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")


@dataclass(frozen=True)
class SyntheticVocabulary:
    fillers: dict[LanguageCode, tuple[str, ...]]
    markers: dict[DialectLabel, tuple[str, ...]]


def _new_word(rng: random.Random, syllables: tuple[str, ...],
              n_syllables: int, used: set[str]) -> str:
    for _ in range(10_000):
        word = "".join(rng.choice(syllables) for _ in range(n_syllables))
        if word not in used and not any(
            word in other or other in word for other in used
        ):
            used.add(word)
            return word
    raise ConfigError("syllable inventory too small for the requested vocabulary")


def build_vocabulary(config: SyntheticConfig = SyntheticConfig()) -> SyntheticVocabulary:
    """Fillers per language and globally disjoint markers per class."""
    rng = random.Random(config.seed)
    used: set[str] = set()
    fillers: dict[LanguageCode, tuple[str, ...]] = {}
    for language in LanguageCode:
        fillers[language] = tuple(
            _new_word(rng, _SYLLABLES[language], rng.randint(2, 3), used)
            for _ in range(config.fillers_per_language)
        )
    markers: dict[DialectLabel, tuple[str, ...]] = {}
    for label in TRACK1_LABELS:
        markers[label] = tuple(
            _new_word(rng, _SYLLABLES[label.language], rng.randint(3, 4), used)
            for _ in range(config.markers_per_class)
        )
    return SyntheticVocabulary(fillers=fillers, markers=markers)


def _sentence(rng: random.Random, vocabulary: SyntheticVocabulary,
              label: DialectLabel) -> str:
    words = [
        rng.choice(vocabulary.fillers[label.language])
        for _ in range(rng.randint(3, 6))
    ]
    words += [
        rng.choice(vocabulary.markers[label])
        for _ in range(rng.randint(2, 4))
    ]
    rng.shuffle(words)
    return " ".join(words).capitalize() + "."


def make_synthetic(
    config: SyntheticConfig = SyntheticConfig(),
) -> tuple[SplitDataset, SyntheticVocabulary]:
    """Generate a labeled nine-class corpus with train/validation/test."""
    vocabulary = build_vocabulary(config)
    rng = random.Random(config.seed + 1)  # sentence stream, separate from vocab
    sizes = {
        "train": config.train_per_class,
        "validation": config.validation_per_class,
        "test": config.test_per_class,
    }
    splits: dict[str, list[Sample]] = {}
    for split, per_class in sizes.items():
        samples: list[Sample] = []
        for label in TRACK1_LABELS:
            for _ in range(per_class):
                samples.append(
                    Sample(
                        id=f"syn-{split}-{len(samples):05d}",
                        text=_sentence(rng, vocabulary, label),
                        gold=label,
                    )
                )
        splits[split] = samples
    dataset = SplitDataset(
        track=Track.TRACK1,
        train=splits["train"],
        validation=splits["validation"],
        test=splits["test"],
    )
    return dataset, vocabulary


def write_synthetic(
    out_dir: str | Path, config: SyntheticConfig = SyntheticConfig()
) -> dict[str, Path]:
    """Materialize a synthetic corpus as TSV splits plus its vocabulary."""
    out_dir = Path(out_dir)
    dataset, vocabulary = make_synthetic(config)
    paths: dict[str, Path] = {}
    for name, split in dataset.splits().items():
        paths[name] = write_samples(out_dir / f"{name}.tsv", split)
    vocab_payload = {
        "fillers": {
            language.value: list(words)
            for language, words in vocabulary.fillers.items()
        },
        "markers": {
            label.canonical: list(words)
            for label, words in vocabulary.markers.items()
        },
    }
    vocab_path = out_dir / "vocabulary.json"
    vocab_path.write_text(
        json.dumps(vocab_payload, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    paths["vocabulary"] = vocab_path
    return paths
