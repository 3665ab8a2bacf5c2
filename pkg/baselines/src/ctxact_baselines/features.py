"""Fixed-width numeric encoding of trace context for batch learners.

Layout per attribute kind:

* plain numeric: one column, min-max scaled to its declared span
* cyclic numeric: two columns, sine and cosine of the phase angle, so
  midnight and the instant before it encode as neighbours
* vector: one min-max scaled column per component
* categorical: one-hot over the labels declared in the trace header;
  a label outside that set encodes as an all-zero block

The mapping depends only on the header schema, never on the data seen
so far, so feature row i is identical no matter how much of the trace
has been consumed.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .traces import TraceAttribute, TraceFile, TraceRecord

LABEL_SEP = "|"


def _span_width(attr: TraceAttribute) -> int:
    if attr.kind == "cyclic-numeric":
        return 2
    if attr.kind == "vector-n":
        return len(attr.ranges)
    if attr.kind == "categorical":
        return len(attr.labels)
    return 1


def feature_width(schema: Sequence[TraceAttribute]) -> int:
    return sum(_span_width(a) for a in schema)


def _scaled(value: float, lo: float, hi: float) -> float:
    # degenerate span pins the column rather than dividing by zero
    if hi <= lo:
        return 0.0
    return (float(value) - lo) / (hi - lo)


def encode_features(schema: Sequence[TraceAttribute], values: Sequence) -> np.ndarray:
    """Encode one snapshot's values into a flat float vector."""
    if len(values) != len(schema):
        raise ValueError(f"expected {len(schema)} values, got {len(values)}")
    cols: list[float] = []
    for attr, value in zip(schema, values):
        if attr.kind == "numeric":
            cols.append(_scaled(value, attr.lower, attr.upper))
        elif attr.kind == "cyclic-numeric":
            theta = 2.0 * math.pi * (float(value) % attr.period) / attr.period
            cols.append(math.sin(theta))
            cols.append(math.cos(theta))
        elif attr.kind == "vector-n":
            for component, (lo, hi) in zip(value, attr.ranges):
                cols.append(_scaled(component, lo, hi))
        else:
            block = [0.0] * len(attr.labels)
            if value in attr.labels:
                block[attr.labels.index(value)] = 1.0
            cols.extend(block)
    return np.asarray(cols, dtype=np.float64)


def encode_matrix(trace: TraceFile) -> np.ndarray:
    """Stack every record's feature vector; shape (records, width)."""
    width = feature_width(trace.schema)
    out = np.empty((len(trace.records), width), dtype=np.float64)
    for i, rec in enumerate(trace.records):
        out[i] = encode_features(trace.schema, rec.values)
    return out


def label_for(record: TraceRecord) -> str:
    """Ground-truth label: the device, or device plus action when the
    spoken request left the action open and it must be predicted too."""
    if record.request_action is not None:
        return record.device
    return f"{record.device}{LABEL_SEP}{record.action}"
