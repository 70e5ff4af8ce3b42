"""Two-stage multilingual dialect identification.

Stage one routes a sentence to English, Spanish, or Portuguese; stage
two hands it to that language's dialect classifier, which picks the
national variety (or, on the nine-label task, the common variety).
The package bundles the label taxonomy, corpus handling, trainable
baselines, adapters for external models, the model-combination grid
search, evaluation, and a CLI.
"""

from .corpus import (
    ClassStats,
    ColumnSpec,
    ResampleStrategy,
    Sample,
    SplitDataset,
    class_stats,
    filter_track,
    load_dataset,
    load_samples,
    resample,
    write_samples,
)
from .dialect import (
    AdaptationMode,
    CheckpointRecord,
    DialectModel,
    ExternalDialectModel,
    NgramDialectModel,
    RestrictedDialectModel,
    TrainingConfig,
    adapt_to_track2,
    evaluate_dialect,
    ingest_external_dialect,
    predict_dialect,
    select_checkpoint,
    train_dialect,
)
from .errors import DialectIdError, ValidationError
from .labels import (
    TRACK1_LABELS,
    TRACK2_LABELS,
    DialectLabel,
    LanguageCode,
    Track,
    Variety,
    parse_label,
    parse_language,
)
from .lid import (
    LANGUAGES,
    ExternalLid,
    LidModel,
    NgramLidModel,
    OracleLid,
    evaluate_lid,
    predict_language,
    train_lid,
)
from .metrics import (
    ConfusionMatrix,
    PerClassMetrics,
    accuracy,
    confusion,
    macro_f1,
    per_class_metrics,
    row_normalize,
)
from .pipeline import (
    ComboResult,
    Pipeline,
    PipelinePrediction,
    compose,
    evaluate_pipeline,
    grid_search,
    predict,
    predict_batch,
    write_predictions,
)
from .registry import ModelRegistry, RegistryEntry, create_run_dir
from .reports import (
    ComparisonReport,
    EvalReport,
    StatsReport,
    compare_adapted_vs_finetuned,
    dataset_stats,
    evaluate_predictions,
    render_report,
)
from .synthetic import SyntheticConfig, make_synthetic, write_synthetic

__version__ = "0.1.0"

__all__ = [
    "AdaptationMode",
    "CheckpointRecord",
    "ClassStats",
    "ColumnSpec",
    "ComboResult",
    "ComparisonReport",
    "ConfusionMatrix",
    "DialectIdError",
    "DialectLabel",
    "DialectModel",
    "EvalReport",
    "ExternalDialectModel",
    "ExternalLid",
    "LANGUAGES",
    "LanguageCode",
    "LidModel",
    "ModelRegistry",
    "NgramDialectModel",
    "NgramLidModel",
    "OracleLid",
    "PerClassMetrics",
    "Pipeline",
    "PipelinePrediction",
    "RegistryEntry",
    "ResampleStrategy",
    "RestrictedDialectModel",
    "Sample",
    "SplitDataset",
    "StatsReport",
    "SyntheticConfig",
    "TRACK1_LABELS",
    "TRACK2_LABELS",
    "Track",
    "TrainingConfig",
    "ValidationError",
    "Variety",
    "accuracy",
    "adapt_to_track2",
    "class_stats",
    "compare_adapted_vs_finetuned",
    "compose",
    "confusion",
    "create_run_dir",
    "dataset_stats",
    "evaluate_dialect",
    "evaluate_lid",
    "evaluate_pipeline",
    "evaluate_predictions",
    "filter_track",
    "grid_search",
    "ingest_external_dialect",
    "load_dataset",
    "load_samples",
    "macro_f1",
    "make_synthetic",
    "parse_label",
    "parse_language",
    "per_class_metrics",
    "predict",
    "predict_batch",
    "predict_dialect",
    "predict_language",
    "render_report",
    "resample",
    "row_normalize",
    "select_checkpoint",
    "train_dialect",
    "train_lid",
    "write_predictions",
    "write_samples",
    "write_synthetic",
    "__version__",
]
