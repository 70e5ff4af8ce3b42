"""Corpus loading, per-class statistics, and class-imbalance handling.

Data files are delimited text, one sample per row, read as UTF-8.  The
column layout is described by a :class:`ColumnSpec` so the same loader
handles headered TSV exports, raw CSV, and unlabeled prediction inputs.

Sentence-level splits are kept verbatim: no deduplication, no shuffling,
and no rebalancing happens at load time.  Rebalancing is an explicit,
seeded, opt-in step (:func:`resample`) so that reported class statistics
always describe the corpus as it is on disk.
"""

from __future__ import annotations

import csv
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    EmptyInput,
    EmptyText,
    LabelOutsideSet,
    MalformedRow,
    TrackMismatch,
    ValidationError,
)
from .labels import DialectLabel, LanguageCode, Track, parse_label, sort_canonical


@dataclass(frozen=True)
class Sample:
    """One sentence with an id and, for labeled splits, a gold label."""

    id: str
    text: str
    gold: DialectLabel | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("sample id must be non-empty")
        if not self.text or not self.text.strip():
            raise EmptyText(f"sample {self.id!r} has empty text")

    @property
    def language(self) -> LanguageCode:
        if self.gold is None:
            raise ValidationError(f"sample {self.id!r} is unlabeled")
        return self.gold.language


@dataclass(frozen=True)
class ColumnSpec:
    """Where to find id, text, and label in a delimited file.

    With ``header=True`` the column fields are header names; without a
    header they are 0-based integer indices.  ``label_column=None`` loads
    an unlabeled file.
    """

    delimiter: str = "\t"
    header: bool = True
    id_column: str | int = "id"
    text_column: str | int = "text"
    label_column: str | int | None = "label"

    def __post_init__(self) -> None:
        if len(self.delimiter) != 1:
            raise ValidationError("delimiter must be a single character")
        columns = [self.id_column, self.text_column]
        if self.label_column is not None:
            columns.append(self.label_column)
        for column in columns:
            if self.header and not isinstance(column, str):
                raise ValidationError("headered files use column names, not indices")
            if not self.header and not isinstance(column, int):
                raise ValidationError("headerless files use column indices, not names")
        if len(set(columns)) != len(columns):
            raise ValidationError("id, text, and label columns must be distinct")


@dataclass(frozen=True)
class RejectedRow:
    row_number: int
    reason: str


@dataclass
class LoadReport:
    """Result of a permissive load: good samples plus rejected rows."""

    samples: list[Sample]
    rejected: list[RejectedRow]


def _row_value(row: Sequence[str], key: str | int, index: dict[str, int] | None,
               row_number: int) -> str:
    if index is not None:
        position = index.get(key)  # type: ignore[arg-type]
        if position is None:
            raise MalformedRow(row_number, f"missing column {key!r}")
    else:
        position = key  # type: ignore[assignment]
    if not isinstance(position, int) or position < 0 or position >= len(row):
        raise MalformedRow(row_number, f"no value for column {key!r}")
    return row[position]


def load_samples(
    path: str | Path,
    spec: ColumnSpec = ColumnSpec(),
    track: Track | None = None,
    permissive: bool = False,
) -> list[Sample] | LoadReport:
    """Load one delimited file into samples.

    With ``track`` given, every parsed label must belong to that track's
    label set.  In strict mode (default) the first bad row raises
    :class:`MalformedRow`; in permissive mode bad rows are collected into
    the returned :class:`LoadReport` instead.
    """
    path = Path(path)
    samples: list[Sample] = []
    rejected: list[RejectedRow] = []
    seen_ids: set[str] = set()

    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=spec.delimiter)
        header_index: dict[str, int] | None = None
        row_number = 0
        if spec.header:
            try:
                header_row = next(reader)
            except StopIteration:
                raise MalformedRow(1, "file is empty, expected a header row") from None
            row_number = 1
            header_index = {name: i for i, name in enumerate(header_row)}
        for row in reader:
            row_number += 1
            if not row:
                continue
            try:
                sample_id = _row_value(row, spec.id_column, header_index, row_number).strip()
                text = _row_value(row, spec.text_column, header_index, row_number)
                gold: DialectLabel | None = None
                if spec.label_column is not None:
                    raw_label = _row_value(row, spec.label_column, header_index, row_number)
                    gold = parse_label(raw_label)
                    if track is not None and gold not in track.label_set:
                        raise TrackMismatch(
                            f"label {gold} is not in the {track} label set"
                        )
                if sample_id in seen_ids:
                    raise ValidationError(f"duplicate sample id {sample_id!r}")
                sample = Sample(id=sample_id, text=text, gold=gold)
            except ValidationError as error:
                if permissive:
                    rejected.append(RejectedRow(row_number, str(error)))
                    continue
                if isinstance(error, MalformedRow):
                    raise
                raise MalformedRow(row_number, str(error)) from error
            seen_ids.add(sample_id)
            samples.append(sample)

    if permissive:
        return LoadReport(samples=samples, rejected=rejected)
    return samples


@dataclass
class SplitDataset:
    """Train/validation/test splits sharing one track's label set."""

    track: Track
    train: list[Sample] = field(default_factory=list)
    validation: list[Sample] = field(default_factory=list)
    test: list[Sample] = field(default_factory=list)

    def __post_init__(self) -> None:
        for name, split in self.splits().items():
            ids = [sample.id for sample in split]
            if len(set(ids)) != len(ids):
                raise ValidationError(f"duplicate sample ids in {name} split")
            for sample in split:
                if sample.gold is not None and sample.gold not in self.track.label_set:
                    raise TrackMismatch(
                        f"{name} sample {sample.id!r} labeled {sample.gold}, "
                        f"outside the {self.track} label set"
                    )

    def splits(self) -> dict[str, list[Sample]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def subset(self, language: LanguageCode) -> "SplitDataset":
        """Restrict every split to samples of one language."""
        return SplitDataset(
            track=self.track,
            train=[s for s in self.train if s.language is language],
            validation=[s for s in self.validation if s.language is language],
            test=[s for s in self.test if s.language is language],
        )


def load_dataset(
    train_path: str | Path,
    spec: ColumnSpec = ColumnSpec(),
    track: Track = Track.TRACK1,
    validation_path: str | Path | None = None,
    test_path: str | Path | None = None,
) -> SplitDataset:
    """Load up to three split files into one labeled dataset."""
    train = load_samples(train_path, spec, track)
    validation = (
        load_samples(validation_path, spec, track) if validation_path else []
    )
    test = load_samples(test_path, spec, track) if test_path else []
    assert isinstance(train, list) and isinstance(validation, list)
    assert isinstance(test, list)
    return SplitDataset(track=track, train=train, validation=validation, test=test)


def write_samples(path: str | Path, samples: Iterable[Sample],
                  spec: ColumnSpec = ColumnSpec()) -> Path:
    """Write samples back out in the layout described by ``spec``.

    Used to export splits for external model backbones and to materialize
    synthetic corpora.  Only headered specs are supported for writing.
    """
    if not spec.header:
        raise ValidationError("writing requires a headered column spec")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labeled = spec.label_column is not None
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=spec.delimiter, lineterminator="\n")
        header = [spec.id_column, spec.text_column]
        if labeled:
            header.append(spec.label_column)
        writer.writerow(header)
        for sample in samples:
            row = [sample.id, sample.text]
            if labeled:
                if sample.gold is None:
                    raise ValidationError(f"sample {sample.id!r} has no label to write")
                row.append(sample.gold.canonical)
            writer.writerow(row)
    return path


@dataclass(frozen=True)
class ClassStats:
    """Per-class counts over one split, in canonical label order."""

    track: Track
    counts: dict[DialectLabel, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def largest(self) -> tuple[DialectLabel, int]:
        return max(self.counts.items(), key=lambda item: (item[1], -_rank(item[0])))

    @property
    def smallest(self) -> tuple[DialectLabel, int]:
        """Smallest among classes that actually occur."""
        present = [item for item in self.counts.items() if item[1] > 0]
        if not present:
            raise EmptyInput("no classes with nonzero count")
        return min(present, key=lambda item: (item[1], _rank(item[0])))

    @property
    def imbalance_ratio(self) -> float:
        """Largest over smallest nonzero class count."""
        return self.largest[1] / self.smallest[1]


def _rank(label: DialectLabel) -> int:
    from .labels import canonical_index

    return canonical_index(label)


def class_stats(samples: Sequence[Sample], track: Track) -> ClassStats:
    """Count samples per label over the full track label set.

    Labels with zero occurrences are still present in the result so that
    downstream tables and plots always have a fixed row set.
    """
    if not samples:
        raise EmptyInput("cannot compute class statistics of an empty split")
    counter: Counter[DialectLabel] = Counter()
    for sample in samples:
        if sample.gold is None:
            raise ValidationError(f"sample {sample.id!r} is unlabeled")
        if sample.gold not in track.label_set:
            raise LabelOutsideSet(
                f"sample {sample.id!r} labeled {sample.gold}, outside {track}"
            )
        counter[sample.gold] += 1
    return ClassStats(
        track=track,
        counts={label: counter.get(label, 0) for label in track.label_set},
    )


class ResampleStrategy:
    """Names for the two supported imbalance treatments."""

    OVERSAMPLE = "oversample"
    WEIGHTED = "weighted"
    ALL = (OVERSAMPLE, WEIGHTED)


def resample(
    samples: Sequence[Sample],
    strategy: str,
    seed: int = 0,
) -> list[Sample] | list[float]:
    """Apply a class-imbalance treatment to a labeled sample list.

    ``oversample`` duplicates minority-class samples, drawn uniformly with
    replacement using a generator seeded with ``seed``, until every class
    present matches the largest class count.  The original samples are
    kept and duplicates are appended grouped by class, so the result is
    deterministic for a given seed.

    ``weighted`` leaves the samples alone and returns one weight per
    input sample, ``w = N / (K * n_c)`` where ``N`` is the sample count,
    ``K`` the number of classes present, and ``n_c`` the size of the
    sample's class.  Weights average to exactly 1, so a weighted loss
    stays on the same scale as the unweighted one.
    """
    if not samples:
        raise EmptyInput("cannot resample an empty sample list")
    by_class: dict[DialectLabel, list[Sample]] = {}
    for sample in samples:
        if sample.gold is None:
            raise ValidationError(f"sample {sample.id!r} is unlabeled")
        by_class.setdefault(sample.gold, []).append(sample)

    if strategy == ResampleStrategy.OVERSAMPLE:
        rng = random.Random(seed)
        out = list(samples)
        target = max(len(group) for group in by_class.values())
        for label in sort_canonical(by_class):
            group = by_class[label]
            for _ in range(target - len(group)):
                out.append(rng.choice(group))
        return out

    if strategy == ResampleStrategy.WEIGHTED:
        total = len(samples)
        k = len(by_class)
        return [total / (k * len(by_class[sample.gold])) for sample in samples]  # type: ignore[index]

    raise ValidationError(
        f"unknown resample strategy {strategy!r}; expected one of {ResampleStrategy.ALL}"
    )


def filter_track(dataset: SplitDataset, target: Track) -> SplitDataset:
    """Convert a dataset between the nine-label and six-label tasks.

    Narrowing to track 2 drops common-variety samples and keeps national
    ones unchanged.  Widening back to track 1 keeps every sample (the
    six-label set is a subset of the nine-label set).  Sample order is
    preserved; nothing is relabeled.
    """
    if dataset.track is target:
        return SplitDataset(
            track=target,
            train=list(dataset.train),
            validation=list(dataset.validation),
            test=list(dataset.test),
        )
    if dataset.track is Track.TRACK1 and target is Track.TRACK2:
        def keep(split: list[Sample]) -> list[Sample]:
            return [s for s in split if s.gold is not None and not s.gold.is_common]

        return SplitDataset(
            track=target,
            train=keep(dataset.train),
            validation=keep(dataset.validation),
            test=keep(dataset.test),
        )
    # Track 2 labels are all valid track 1 labels already.
    return SplitDataset(
        track=target,
        train=list(dataset.train),
        validation=list(dataset.validation),
        test=list(dataset.test),
    )


def relabel(sample: Sample, label: DialectLabel) -> Sample:
    return replace(sample, gold=label)
