"""Command line interface.

One executable, ``dialectid``, with one subcommand per workflow step:
corpus statistics, synthetic data generation, split export for external
backbones, training (router, single dialect model, or the full model
set), the model-combination grid search, cascade prediction, scoring,
two-way adaptation, the adapted-versus-fine-tuned comparison, and
re-plotting saved reports.

Settings resolve in precedence order: explicit flag, then environment
variable (``DIALECTID_SEED``, ``DIALECTID_TRACK``, ``DIALECTID_OUT``,
``DIALECTID_FORMAT``, ``DIALECTID_CONFIG``, ``DIALECTID_FORCE``), then
the ``--config`` JSON file, then built-in defaults.

Exit codes: 0 on success, 1 for usage and input-contract errors, 2 for
runtime failures such as unreadable files or broken prediction tables.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import (
    ColumnSpec,
    Sample,
    SplitDataset,
    filter_track,
    load_samples,
    write_samples,
)
from .dialect import (
    AdaptationMode,
    TrainingConfig,
    adapt_to_track2,
    ingest_external_dialect,
    train_dialect,
)
from .errors import (
    CliUsageError,
    ConfigError,
    DialectIdError,
    EmptyInput,
    ValidationError,
)
from .labels import LanguageCode, Track, parse_label, parse_language
from .lid import LANGUAGES, ExternalLid, OracleLid, evaluate_lid, train_lid
from .pipeline import compose, grid_search, predict_batch, write_predictions
from .registry import (
    ModelRegistry,
    RegistryEntry,
    config_hash,
    create_run_dir,
    save_ngram_dialect,
    save_ngram_lid,
    write_dialect_history,
    write_lid_history,
)
from .reports import (
    FORMATS,
    compare_adapted_vs_finetuned,
    dataset_stats,
    evaluate_predictions,
    load_report,
    render_report,
)
from .synthetic import SyntheticConfig, write_synthetic

_EXT = {"json": "json", "csv": "csv", "plot": "png"}


# ---------------------------------------------------------------- config

@dataclass
class ColumnOptions:
    delimiter: str = "\t"
    header: bool = True
    id_column: str = "id"
    text_column: str = "text"
    label_column: str = "label"


@dataclass
class PathOptions:
    train: str | None = None
    validation: str | None = None
    test: str | None = None


@dataclass
class LidOptions:
    epochs: int = 30
    learning_rate: float = 0.5
    weight_decay: float = 0.0
    batch_size: int = 0
    orders: tuple[int, ...] = (1, 2, 3)
    hash_dim: int = 2 ** 15
    max_text_length: int = 256


@dataclass
class DialectOptions:
    # Defaults follow the built-in n-gram backbone, the only one the CLI
    # trains itself; fine-tuning profiles arrive via external ingestion.
    epochs: int = 20
    learning_rate: float = 0.3
    weight_decay: float = 0.0
    batch_size: int = 0
    orders: tuple[int, ...] = (2, 3, 4)
    hash_dim: int = 2 ** 16
    max_text_length: int = 256
    resample: str | None = None


@dataclass
class RunConfig:
    """Everything a training run needs, file-configurable as JSON."""

    track: int = 1
    seed: int = 0
    out: str = "workspace"
    format: str = "json"
    data: PathOptions = field(default_factory=PathOptions)
    columns: ColumnOptions = field(default_factory=ColumnOptions)
    lid: LidOptions = field(default_factory=LidOptions)
    dialect: DialectOptions = field(default_factory=DialectOptions)

    def to_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["lid"]["orders"] = list(self.lid.orders)
        payload["dialect"]["orders"] = list(self.dialect.orders)
        return payload

    def fingerprint(self) -> dict:
        """Config slice that determines training outcomes.

        Excludes the workspace root and report format, so identical
        training runs hash alike no matter where their artifacts land.
        """
        payload = self.to_dict()
        payload.pop("out")
        payload.pop("format")
        return payload

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as error:
            raise ConfigError(f"config file {path} is not valid JSON: {error}")
        if not isinstance(payload, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        config = cls()
        sections = {
            "data": (PathOptions, "data"),
            "columns": (ColumnOptions, "columns"),
            "lid": (LidOptions, "lid"),
            "dialect": (DialectOptions, "dialect"),
        }
        for key, value in payload.items():
            if key in ("track", "seed", "out", "format"):
                setattr(config, key, value)
            elif key in sections:
                section_cls, attr = sections[key]
                setattr(config, attr, _section(section_cls, value, key))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        if config.track not in (1, 2):
            raise ConfigError("track must be 1 or 2")
        if config.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        return config


def _section(section_cls, payload: dict, where: str):
    if not isinstance(payload, dict):
        raise ConfigError(f"config section {where!r} must be an object")
    known = {f.name for f in dataclasses.fields(section_cls)}
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(
            f"unknown key(s) in config section {where!r}: {sorted(unknown)}"
        )
    values = dict(payload)
    if "orders" in values and values["orders"] is not None:
        values["orders"] = tuple(int(n) for n in values["orders"])
    return section_cls(**values)


def _env(name: str) -> str | None:
    value = os.environ.get(name)
    return value if value not in (None, "") else None


def _env_int(name: str) -> int | None:
    raw = _env(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}")


def load_config(args: argparse.Namespace) -> RunConfig:
    """Resolve flag > environment > config file > default."""
    config_path = getattr(args, "config", None) or _env("DIALECTID_CONFIG")
    config = RunConfig.from_file(config_path) if config_path else RunConfig()

    env_seed = _env_int("DIALECTID_SEED")
    if env_seed is not None:
        config.seed = env_seed
    env_track = _env_int("DIALECTID_TRACK")
    if env_track is not None:
        config.track = env_track
    env_out = _env("DIALECTID_OUT")
    if env_out is not None:
        config.out = env_out
    env_format = _env("DIALECTID_FORMAT")
    if env_format is not None:
        config.format = env_format

    for name in ("seed", "track", "out", "format"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    for name in ("train", "validation", "test"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config.data, name, value)
    if getattr(args, "delimiter", None) is not None:
        config.columns.delimiter = args.delimiter
    if getattr(args, "no_header", False):
        config.columns.header = False
    for name in ("id_column", "text_column", "label_column"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config.columns, name, value)

    if config.track not in (1, 2):
        raise ConfigError("track must be 1 or 2")
    if config.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    return config


def _force(args: argparse.Namespace) -> bool:
    if getattr(args, "force", False):
        return True
    return (_env("DIALECTID_FORCE") or "").lower() in ("1", "true", "yes")


def _column_spec(columns: ColumnOptions, labeled: bool = True) -> ColumnSpec:
    def _column(value: str):
        if columns.header:
            return value
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(
                f"headerless files take integer column positions, got {value!r}"
            )

    return ColumnSpec(
        delimiter=columns.delimiter,
        header=columns.header,
        id_column=_column(columns.id_column),
        text_column=_column(columns.text_column),
        label_column=_column(columns.label_column) if labeled else None,
    )


def _load_view(
    path: str | Path, spec: ColumnSpec, track: Track, split: str
) -> list[Sample]:
    """Read a nine-label file and narrow it to the requested track view."""
    samples = load_samples(path, spec, Track.TRACK1)
    assert isinstance(samples, list)
    if track is Track.TRACK2:
        kept = [s for s in samples if s.gold is not None and not s.gold.is_common]
        dropped = len(samples) - len(kept)
        if dropped:
            print(f"{split}: dropped {dropped} common-variety row(s) for the track 2 view")
        return kept
    return samples


def _load_dataset_view(config: RunConfig, require: tuple[str, ...]) -> SplitDataset:
    track = Track(config.track)
    spec = _column_spec(config.columns)
    paths = {
        "train": config.data.train,
        "validation": config.data.validation,
        "test": config.data.test,
    }
    for name in require:
        if not paths[name]:
            raise CliUsageError(f"--{name} (or config data.{name}) is required")
    splits = {
        name: _load_view(path, spec, track, name) if path else []
        for name, path in paths.items()
    }
    return SplitDataset(track=track, **splits)


# ---------------------------------------------------------------- helpers

def _out_path(args: argparse.Namespace, config: RunConfig, stem: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(f"{stem}.{_EXT[config.format]}")


def _registry(args: argparse.Namespace, config: RunConfig) -> ModelRegistry:
    root = getattr(args, "workspace", None) or config.out
    return ModelRegistry(root)


def _training_config(options: DialectOptions, seed: int) -> TrainingConfig:
    return TrainingConfig(
        epochs=options.epochs,
        learning_rate=options.learning_rate,
        weight_decay=options.weight_decay,
        batch_size=options.batch_size,
        seed=seed,
        max_text_length=options.max_text_length,
        resample=options.resample,
    )


def _train_lid_into(
    run_dir: Path,
    registry: ModelRegistry,
    dataset: SplitDataset,
    config: RunConfig,
    model_id: str,
    force: bool,
    verbose: bool,
) -> str:
    model = train_lid(
        dataset.train,
        dataset.validation or None,
        epochs=config.lid.epochs,
        learning_rate=config.lid.learning_rate,
        weight_decay=config.lid.weight_decay,
        batch_size=config.lid.batch_size,
        seed=config.seed,
        orders=config.lid.orders,
        hash_dim=config.lid.hash_dim,
        max_text_length=config.lid.max_text_length,
        verbose=verbose,
    )
    checkpoint = save_ngram_lid(model, run_dir / "checkpoints" / f"{model_id}.npz")
    history = write_lid_history(model.history, run_dir / "history" / f"{model_id}.json")
    registry.add(
        RegistryEntry(
            model_id=model_id,
            role="lid",
            kind="ngram",
            checkpoint=str(checkpoint.relative_to(registry.root)),
            history=str(history.relative_to(registry.root)),
            config_hash=config_hash(config.fingerprint()),
            run_id=run_dir.name,
        ),
        replace=force,
    )
    summary = f"router {model_id}: train acc {model.history[-1].train_accuracy:.4f}"
    if model.history[-1].validation_accuracy is not None:
        summary += f", validation acc {model.history[-1].validation_accuracy:.4f}"
    print(summary)
    return model_id


def _train_dialect_into(
    run_dir: Path,
    registry: ModelRegistry,
    dataset: SplitDataset,
    config: RunConfig,
    language: LanguageCode,
    model_id: str,
    force: bool,
    verbose: bool,
) -> str:
    track = Track(config.track)
    subset = dataset.subset(language)
    model, history = train_dialect(
        subset.train,
        subset.validation,
        language=language,
        track=track,
        config=_training_config(config.dialect, config.seed),
        orders=config.dialect.orders,
        hash_dim=config.dialect.hash_dim,
        name=model_id,
        verbose=verbose,
    )
    checkpoint = save_ngram_dialect(model, run_dir / "checkpoints" / f"{model_id}.npz")
    history_path = write_dialect_history(history, run_dir / "history" / f"{model_id}.json")
    from .dialect import select_checkpoint

    selected = select_checkpoint(history)
    registry.add(
        RegistryEntry(
            model_id=model_id,
            role="dialect",
            kind="ngram",
            language=language.value,
            track=track.value,
            checkpoint=str(checkpoint.relative_to(registry.root)),
            history=str(history_path.relative_to(registry.root)),
            selected_epoch=selected.epoch,
            config_hash=config_hash(config.fingerprint()),
            run_id=run_dir.name,
        ),
        replace=force,
    )
    print(
        f"dialect {model_id}: selected epoch {selected.epoch} "
        f"(validation macro-F1 {selected.validation_macro_f1:.4f})"
    )
    return model_id


def _write_run_config(run_dir: Path, config: RunConfig, command: str) -> None:
    payload = {"command": command, **config.fingerprint()}
    (run_dir / "config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _resolve_lid(
    choice: str,
    registry: ModelRegistry,
    lid_file: str | None,
    samples: list[Sample],
):
    if lid_file:
        return ExternalLid.load(lid_file)
    if choice == "oracle":
        return OracleLid.from_samples(samples)
    return registry.load_lid(choice)


# ---------------------------------------------------------------- commands

def cmd_stats(args: argparse.Namespace) -> None:
    config = load_config(args)
    if not (config.data.train or config.data.validation or config.data.test):
        raise CliUsageError("stats needs at least one of --train/--validation/--test")
    dataset = _load_dataset_view(config, require=())
    report = dataset_stats(dataset)
    for name, stats in report.splits.items():
        largest = stats.largest
        smallest = stats.smallest
        print(
            f"{name}: total={stats.total} largest={largest[0]}({largest[1]}) "
            f"smallest={smallest[0]}({smallest[1]}) "
            f"imbalance={stats.imbalance_ratio:.2f}"
        )
    if report.combined is not None:
        largest = report.combined.largest
        smallest = report.combined.smallest
        print(
            f"train+validation: total={report.combined.total} "
            f"largest={largest[0]}({largest[1]}) "
            f"smallest={smallest[0]}({smallest[1]}) "
            f"imbalance={report.combined.imbalance_ratio:.2f}"
        )
    out = _out_path(args, config, "stats")
    for path in render_report(report, config.format, out):
        print(f"wrote {path}")


def cmd_make_synthetic(args: argparse.Namespace) -> None:
    config = load_config(args)
    synthetic = SyntheticConfig(
        seed=config.seed,
        train_per_class=args.train_per_class,
        validation_per_class=args.validation_per_class,
        test_per_class=args.test_per_class,
    )
    out_dir = Path(args.out or config.out)
    paths = write_synthetic(out_dir, synthetic)
    for name in ("train", "validation", "test", "vocabulary"):
        print(f"wrote {paths[name]}")


def cmd_export_splits(args: argparse.Namespace) -> None:
    config = load_config(args)
    language = parse_language(args.language)
    dataset = _load_dataset_view(config, require=("train", "validation"))
    subset = dataset.subset(language)
    out_dir = Path(args.out or config.out)
    for name, split in subset.splits().items():
        if not split:
            continue
        path = write_samples(out_dir / f"{language.value.lower()}-{name}.tsv", split)
        print(f"wrote {path} ({len(split)} samples)")


def cmd_train_lid(args: argparse.Namespace) -> None:
    config = load_config(args)
    _apply_lid_flags(args, config)
    dataset = _load_dataset_view(config, require=("train",))
    force = _force(args)
    model_id = args.model_id or f"lid-ngram-s{config.seed}"
    run_id = args.run_id or f"train-lid-s{config.seed}-{config_hash(config.fingerprint())}"
    registry = ModelRegistry(config.out)
    run_dir = create_run_dir(registry.root, run_id, force)
    _write_run_config(run_dir, config, "train-lid")
    _train_lid_into(run_dir, registry, dataset, config, model_id, force, args.verbose)
    registry.save()


def cmd_train_dialect(args: argparse.Namespace) -> None:
    config = load_config(args)
    _apply_dialect_flags(args, config)
    language = parse_language(args.language)
    track = Track(config.track)
    force = _force(args)
    backbone = args.backbone
    model_id = args.model_id or (
        f"{language.value.lower()}-t{track.value}-{backbone}-s{config.seed}"
    )
    run_id = args.run_id or (
        f"train-dialect-{language.value.lower()}-s{config.seed}-"
        f"{config_hash(config.fingerprint())}"
    )
    registry = ModelRegistry(config.out)
    run_dir = create_run_dir(registry.root, run_id, force)
    _write_run_config(run_dir, config, "train-dialect")

    if backbone == "ngram":
        dataset = _load_dataset_view(config, require=("train", "validation"))
        _train_dialect_into(
            run_dir, registry, dataset, config, language, model_id, force, args.verbose
        )
    else:
        if not args.predictions:
            raise CliUsageError("--backbone external requires --predictions DIR")
        dataset = _load_dataset_view(config, require=("validation",))
        subset = dataset.subset(language)
        model, history = ingest_external_dialect(
            args.predictions,
            language=language,
            track=track,
            validation=subset.validation,
            train=subset.train or None,
            name=model_id,
        )
        import shutil

        checkpoint = run_dir / "checkpoints" / f"{model_id}.csv"
        shutil.copyfile(Path(args.predictions) / f"epoch-{model.epoch}.csv", checkpoint)
        history_path = write_dialect_history(
            history, run_dir / "history" / f"{model_id}.json"
        )
        registry.add(
            RegistryEntry(
                model_id=model_id,
                role="dialect",
                kind="external",
                language=language.value,
                track=track.value,
                checkpoint=str(checkpoint.relative_to(registry.root)),
                history=str(history_path.relative_to(registry.root)),
                selected_epoch=model.epoch,
                config_hash=config_hash(config.fingerprint()),
                run_id=run_dir.name,
            ),
            replace=force,
        )
        best = max(history, key=lambda r: (r.validation_macro_f1, -r.epoch))
        print(
            f"dialect {model_id}: selected epoch {best.epoch} "
            f"(validation macro-F1 {best.validation_macro_f1:.4f})"
        )
    registry.save()


def cmd_train(args: argparse.Namespace) -> None:
    config = load_config(args)
    _apply_dialect_flags(args, config)
    force = _force(args)
    dataset = _load_dataset_view(config, require=("train", "validation"))
    run_id = args.run_id or f"train-s{config.seed}-{config_hash(config.fingerprint())}"
    registry = ModelRegistry(config.out)
    run_dir = create_run_dir(registry.root, run_id, force)
    _write_run_config(run_dir, config, "train")

    prefix = f"{args.model_prefix}-" if args.model_prefix else ""
    lid_id = f"{prefix}lid-ngram-s{config.seed}"
    if args.skip_lid:
        print("skipping router training")
    else:
        _train_lid_into(run_dir, registry, dataset, config, lid_id, force, args.verbose)
    for language in LANGUAGES:
        model_id = (
            f"{prefix}{language.value.lower()}-t{config.track}-ngram-s{config.seed}"
        )
        _train_dialect_into(
            run_dir, registry, dataset, config, language, model_id, force, args.verbose
        )
    registry.save()
    print(f"run directory: {run_dir}")


def cmd_grid_search(args: argparse.Namespace) -> None:
    config = load_config(args)
    track = Track(config.track)
    registry = _registry(args, config)
    spec = _column_spec(config.columns)
    if not config.data.validation:
        raise CliUsageError("grid search needs --validation")
    validation = _load_view(config.data.validation, spec, track, "validation")

    pools: dict[LanguageCode, dict[str, object]] = {}
    for language, raw in zip(LANGUAGES, (args.en, args.es, args.pt)):
        if not raw:
            raise CliUsageError(f"--{language.value.lower()} candidate list is required")
        ids = [model_id.strip() for model_id in raw.split(",") if model_id.strip()]
        pools[language] = {model_id: registry.load_dialect(model_id) for model_id in ids}

    lid = _resolve_lid(args.lid, registry, args.lid_file, validation)
    results = grid_search(pools, lid, validation, track)

    if args.test:
        test = _load_view(args.test, spec, track, "test")
        test_lid = _resolve_lid(args.lid, registry, args.lid_file, test)
        from dataclasses import replace as dc_replace

        from .pipeline import evaluate_pipeline

        scored = []
        for rank, result in enumerate(results, start=1):
            if rank <= 3:  # submission candidates only
                pipeline = compose(
                    test_lid,
                    {
                        language: pools[language][result.combination[language]]
                        for language in LANGUAGES
                    },
                    track,
                )
                result = dc_replace(
                    result, test_macro_f1=evaluate_pipeline(pipeline, test)
                )
            scored.append(result)
        results = scored

    for rank, result in enumerate(results, start=1):
        mark = "*" if rank <= 3 else " "
        line = (
            f"{mark} {rank}. "
            + " / ".join(result.key)
            + f"  validation macro-F1 {result.validation_macro_f1:.4f}"
        )
        if result.test_macro_f1 is not None:
            line += f"  test macro-F1 {result.test_macro_f1:.4f}"
        print(line)
    out = _out_path(args, config, "grid")
    for path in render_report(results, config.format, out):
        print(f"wrote {path}")


def cmd_run_pipeline(args: argparse.Namespace) -> None:
    config = load_config(args)
    track = Track(config.track)
    registry = _registry(args, config)
    labeled = args.evaluate or args.lid == "oracle"
    spec = _column_spec(config.columns, labeled=labeled)
    if labeled:
        samples = _load_view(args.input, spec, track, "input")
    else:
        loaded = load_samples(args.input, spec)
        assert isinstance(loaded, list)
        samples = loaded

    models = {}
    for language, model_id in zip(LANGUAGES, (args.en, args.es, args.pt)):
        if not model_id:
            raise CliUsageError(f"--{language.value.lower()} model id is required")
        models[language] = registry.load_dialect(model_id)
    lid = _resolve_lid(args.lid, registry, args.lid_file, samples)
    pipeline = compose(lid, models, track)

    predictions = predict_batch(pipeline, samples)
    out = Path(args.out) if args.out else Path("predictions.csv")
    write_predictions(out, predictions, track, include_probabilities=args.probabilities)
    print(f"wrote {len(predictions)} prediction(s) to {out}")

    if args.evaluate:
        if not samples:
            raise EmptyInput("cannot evaluate an empty input file")
        gold = [sample.gold for sample in samples]
        predicted = [prediction.predicted for prediction in predictions]
        report = evaluate_predictions(
            gold, predicted, track,
            metadata={"input": Path(args.input).name, "router": args.lid,
                      "generated_at": None},
        )
        print(f"{track} macro-F1 {100 * report.macro_f1:.2f}% over {report.n_samples} samples")
        report_out = Path(args.report_out) if args.report_out else out.with_name(
            f"{out.stem}_report.{_EXT[config.format]}"
        )
        for path in render_report(report, config.format, report_out):
            print(f"wrote {path}")


def cmd_evaluate(args: argparse.Namespace) -> None:
    config = load_config(args)
    track = Track(config.track)
    spec = _column_spec(config.columns)
    gold_samples = _load_view(args.gold, spec, track, "gold")
    if not gold_samples:
        raise EmptyInput("gold file holds no samples for this track view")

    predicted_by_id: dict[str, str] = {}
    import csv as _csv

    with open(args.predictions, newline="", encoding="utf-8") as handle:
        reader = _csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:3] != ["id", "routed_language", "predicted_label"]:
            raise ValidationError(
                f"{args.predictions} is not a predictions file "
                "(expected id,routed_language,predicted_label columns)"
            )
        for row in reader:
            if not row:
                continue
            predicted_by_id[row[0]] = row[2]

    missing = [s.id for s in gold_samples if s.id not in predicted_by_id]
    if missing:
        raise ValidationError(
            f"predictions miss {len(missing)} gold id(s) (first: {missing[0]!r})"
        )
    gold = [s.gold for s in gold_samples]
    predicted = [parse_label(predicted_by_id[s.id]) for s in gold_samples]
    report = evaluate_predictions(
        gold, predicted, track,
        metadata={"gold": Path(args.gold).name,
                  "predictions": Path(args.predictions).name,
                  "generated_at": None},
    )
    print(f"{track} macro-F1 {100 * report.macro_f1:.2f}% over {report.n_samples} samples")
    out = _out_path(args, config, "report")
    for path in render_report(report, config.format, out):
        print(f"wrote {path}")


def cmd_adapt_2way(args: argparse.Namespace) -> None:
    config = load_config(args)
    registry = _registry(args, config)
    mode = AdaptationMode(args.mode)
    base_entry = registry.get(args.model)
    base = registry.load_dialect(args.model)
    adapted = adapt_to_track2(base, mode)
    model_id = args.model_id or f"{args.model}-{mode.value}"
    registry.add(
        RegistryEntry(
            model_id=model_id,
            role="dialect",
            kind="restricted",
            language=base_entry.language or base.language.value,
            track=Track.TRACK2.value,
            run_id=base_entry.run_id,
            extra={"base_model": args.model, "mode": mode.value},
        ),
        replace=_force(args),
    )
    registry.save()
    labels = ", ".join(label.canonical for label in adapted.label_set)
    print(f"registered {model_id} (mode {mode.value}, labels {labels})")


def cmd_compare_2way(args: argparse.Namespace) -> None:
    config = load_config(args)
    registry = _registry(args, config)
    spec = _column_spec(config.columns)
    if not config.data.validation:
        raise CliUsageError("--validation is required")
    validation = _load_view(
        config.data.validation, spec, Track.TRACK2, "validation"
    )
    mode = AdaptationMode(args.mode)

    pairs = []
    pair_names = []
    for raw in args.pair:
        if ":" not in raw:
            raise CliUsageError(
                f"--pair takes BASE:FINETUNED model ids, got {raw!r}"
            )
        base_id, finetuned_id = raw.split(":", 1)
        pairs.append(
            (registry.load_dialect(base_id), registry.load_dialect(finetuned_id))
        )
        pair_names.append((base_id, finetuned_id))
    report = compare_adapted_vs_finetuned(
        pairs, validation, mode,
        metadata={"pairs": [f"{a}:{b}" for a, b in pair_names], "generated_at": None},
    )
    for row in report.rows:
        print(
            f"{row.language}: adapted {100 * row.adapted_f1:.2f}% vs "
            f"fine-tuned {100 * row.finetuned_f1:.2f}% "
            f"(delta {100 * row.delta:+.2f})"
        )
    out = _out_path(args, config, "comparison")
    for path in render_report(report, config.format, out):
        print(f"wrote {path}")


def cmd_plot(args: argparse.Namespace) -> None:
    report = load_report(args.report)
    out = Path(args.out) if args.out else Path(args.report).with_suffix(".png")
    for path in render_report(report, "plot", out):
        print(f"wrote {path}")


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    """argparse maps its own exit to code 2; route errors through ours."""

    def error(self, message: str):
        raise CliUsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--track", type=int, choices=(1, 2),
                        help="label set: 1 = nine labels, 2 = six national labels")
    parser.add_argument("--out", help="output location (default depends on command)")
    parser.add_argument("--format", choices=FORMATS, help="report format (default json)")
    parser.add_argument("--force", action="store_true",
                        help="overwrite existing run directories / registry entries")


def _add_data(parser: argparse.ArgumentParser, *, test: bool = True) -> None:
    parser.add_argument("--train", help="training split file")
    parser.add_argument("--validation", help="validation split file")
    if test:
        parser.add_argument("--test", help="test split file")
    _add_columns(parser)


def _add_columns(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delimiter", help="field delimiter (default tab)")
    parser.add_argument("--no-header", action="store_true",
                        help="files have no header row; column flags take 0-based positions")
    parser.add_argument("--id-column", help="id column (default 'id')")
    parser.add_argument("--text-column", help="text column (default 'text')")
    parser.add_argument("--label-column", help="label column (default 'label')")


def _add_train_hyper(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int, help="training epochs")
    parser.add_argument("--learning-rate", type=float, help="gradient step size")
    parser.add_argument("--weight-decay", type=float, help="L2 penalty strength")
    parser.add_argument("--batch-size", type=int, help="0 means full batch")
    parser.add_argument("--resample", choices=("oversample", "weighted"),
                        help="class-imbalance treatment (default: none)")
    parser.add_argument("--run-id", help="run directory name (default: derived from config)")
    parser.add_argument("--verbose", action="store_true", help="print per-epoch progress")


def _apply_lid_flags(args: argparse.Namespace, config: RunConfig) -> None:
    mapping = {
        "epochs": "epochs",
        "learning_rate": "learning_rate",
        "weight_decay": "weight_decay",
        "batch_size": "batch_size",
    }
    for flag, name in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config.lid, name, value)


def _apply_dialect_flags(args: argparse.Namespace, config: RunConfig) -> None:
    mapping = {
        "epochs": "epochs",
        "learning_rate": "learning_rate",
        "weight_decay": "weight_decay",
        "batch_size": "batch_size",
        "resample": "resample",
    }
    for flag, name in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config.dialect, name, value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dialectid",
        description="Two-stage dialect identification: route by language, "
                    "then classify the national variety.",
    )
    parser.add_argument("--version", action="version", version=f"dialectid {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, handler, help_text: str, **kwargs):
        sub = commands.add_parser(name, help=help_text, **kwargs)
        _add_common(sub)
        sub.set_defaults(handler=handler)
        return sub

    sub = command("stats", cmd_stats, "per-class counts and imbalance of a dataset")
    _add_data(sub)

    sub = command("make-synthetic", cmd_make_synthetic,
                  "generate the seeded synthetic corpus")
    sub.add_argument("--train-per-class", type=int, default=300)
    sub.add_argument("--validation-per-class", type=int, default=60)
    sub.add_argument("--test-per-class", type=int, default=60)

    sub = command("export-splits", cmd_export_splits,
                  "write one language's splits for an external backbone")
    _add_data(sub)
    sub.add_argument("--language", required=True, help="EN, ES, or PT")

    sub = command("train-lid", cmd_train_lid, "train the n-gram language router")
    _add_data(sub, test=False)
    _add_train_hyper(sub)
    sub.add_argument("--model-id", help="registry id (default lid-ngram-s<seed>)")

    sub = command("train-dialect", cmd_train_dialect,
                  "train or ingest one language's dialect classifier")
    _add_data(sub, test=False)
    _add_train_hyper(sub)
    sub.add_argument("--language", required=True, help="EN, ES, or PT")
    sub.add_argument("--backbone", choices=("ngram", "external"), default="ngram")
    sub.add_argument("--predictions",
                     help="directory of epoch-<n>.csv files (external backbone)")
    sub.add_argument("--model-id", help="registry id (default derived)")

    sub = command("train", cmd_train,
                  "train the router plus all three dialect classifiers")
    _add_data(sub, test=False)
    _add_train_hyper(sub)
    sub.add_argument("--skip-lid", action="store_true", help="train dialect models only")
    sub.add_argument("--model-prefix", default="", help="prefix for registry ids")

    sub = command("grid-search", cmd_grid_search,
                  "score every per-language model combination")
    _add_columns(sub)
    sub.add_argument("--workspace", help="workspace root holding registry.json")
    sub.add_argument("--validation", help="multilingual validation file")
    sub.add_argument("--test", help="score the top 3 combinations on this file too")
    sub.add_argument("--en", help="comma-separated EN candidate model ids")
    sub.add_argument("--es", help="comma-separated ES candidate model ids")
    sub.add_argument("--pt", help="comma-separated PT candidate model ids")
    sub.add_argument("--lid", default="oracle",
                     help="router: 'oracle' or a registered model id")
    sub.add_argument("--lid-file", help="external router predictions (id,language,p_en,p_es,p_pt)")

    sub = command("run-pipeline", cmd_run_pipeline,
                  "predict dialect labels for an input file")
    _add_columns(sub)
    sub.add_argument("--workspace", help="workspace root holding registry.json")
    sub.add_argument("--input", required=True, help="input samples file")
    sub.add_argument("--en", help="EN dialect model id")
    sub.add_argument("--es", help="ES dialect model id")
    sub.add_argument("--pt", help="PT dialect model id")
    sub.add_argument("--lid", default="oracle",
                     help="router: 'oracle' or a registered model id")
    sub.add_argument("--lid-file", help="external router predictions file")
    sub.add_argument("--probabilities", action="store_true",
                     help="include probability columns in the predictions file")
    sub.add_argument("--evaluate", action="store_true",
                     help="score against the input file's labels and write a report")
    sub.add_argument("--report-out", help="report path (with --evaluate)")

    sub = command("evaluate", cmd_evaluate, "score a predictions file against gold labels")
    _add_columns(sub)
    sub.add_argument("--gold", required=True, help="gold labeled file")
    sub.add_argument("--predictions", required=True, help="predictions csv")

    sub = command("adapt-2way", cmd_adapt_2way,
                  "register a nine-label model restricted to national labels")
    sub.add_argument("--workspace", help="workspace root holding registry.json")
    sub.add_argument("--model", required=True, help="base model id")
    sub.add_argument("--mode", choices=[m.value for m in AdaptationMode],
                     default=AdaptationMode.RENORMALIZE.value)
    sub.add_argument("--model-id", help="id for the adapted model (default derived)")

    sub = command("compare-2way", cmd_compare_2way,
                  "adapted three-way models vs natively trained two-way models")
    _add_columns(sub)
    sub.add_argument("--workspace", help="workspace root holding registry.json")
    sub.add_argument("--validation", help="validation file (national labels)")
    sub.add_argument("--pair", action="append", required=True,
                     help="BASE:FINETUNED model id pair (repeatable)")
    sub.add_argument("--mode", choices=[m.value for m in AdaptationMode],
                     default=AdaptationMode.RENORMALIZE.value)

    sub = command("plot", cmd_plot, "render a saved JSON report as a figure")
    sub.add_argument("--report", required=True, help="report JSON file")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.handler(args)
    except CliUsageError as error:
        print(f"usage error: {error}", file=sys.stderr)
        return 1
    except ValidationError as error:
        print(f"error: {error}", file=sys.stderr)
        return 1
    except (DialectIdError, OSError) as error:
        print(f"runtime error: {error}", file=sys.stderr)
        return 2
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
