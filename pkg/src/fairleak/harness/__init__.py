"""End-to-end pipeline: data handling, synthetic benchmark, experiments."""

from .data import (
    CATEGORICAL,
    NUMERIC,
    DatasetSchema,
    DatasetTable,
    FeatureColumn,
    ingest_csv,
    largest_remainder_sizes,
    split_dataset,
    write_dataset_csv,
)
from .experiment import (
    DEFAULT_EPSILON_GRID,
    MODE_EXTERNAL,
    ExperimentConfig,
    ExperimentReport,
    ExternalGuess,
    REPORT_COLUMNS,
    ReportRow,
    emit_report,
    load_report_json,
    run_benchmark,
    run_experiment,
)
from .instances import (
    read_guess_csv,
    read_instance_csv,
    write_correction_csv,
    write_guess_csv,
)
from .predictor import (
    LabelPredictor,
    fit_label_predictor,
    make_fair_predictions,
    repair_predictions,
)
from .synth import synth_generate

__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "DEFAULT_EPSILON_GRID",
    "MODE_EXTERNAL",
    "DatasetSchema",
    "DatasetTable",
    "ExperimentConfig",
    "ExperimentReport",
    "ExternalGuess",
    "FeatureColumn",
    "LabelPredictor",
    "REPORT_COLUMNS",
    "ReportRow",
    "emit_report",
    "fit_label_predictor",
    "ingest_csv",
    "largest_remainder_sizes",
    "load_report_json",
    "make_fair_predictions",
    "read_guess_csv",
    "read_instance_csv",
    "repair_predictions",
    "run_benchmark",
    "run_experiment",
    "split_dataset",
    "synth_generate",
    "write_correction_csv",
    "write_dataset_csv",
    "write_guess_csv",
]
