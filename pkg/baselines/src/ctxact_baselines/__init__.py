"""Batch-retrained ML baselines scored on ctxact decision traces.

Consumes the engine's trace files and emits reports in the engine's
CSV/JSON layout; the file formats are the whole interface between the
two packages.
"""

from .features import LABEL_SEP, encode_features, encode_matrix, feature_width, label_for
from .learners import GRIDS, LEARNERS, ConstantModel, fit_best, majority_label, make_estimator
from .replay import (
    CSV_COLUMNS,
    PredictionRecord,
    RetrainingRun,
    replay_with_retraining,
    summary_json,
    write_outputs,
    write_report_csv,
)
from .traces import (
    TraceAttribute,
    TraceError,
    TraceFile,
    TraceRecord,
    attribute_from_json,
    read_trace,
    record_from_json,
)

__all__ = [
    "CSV_COLUMNS",
    "ConstantModel",
    "GRIDS",
    "LABEL_SEP",
    "LEARNERS",
    "PredictionRecord",
    "RetrainingRun",
    "TraceAttribute",
    "TraceError",
    "TraceFile",
    "TraceRecord",
    "attribute_from_json",
    "encode_features",
    "encode_matrix",
    "feature_width",
    "fit_best",
    "label_for",
    "majority_label",
    "make_estimator",
    "read_trace",
    "record_from_json",
    "replay_with_retraining",
    "summary_json",
    "write_outputs",
    "write_report_csv",
]
