"""Reader for the decision-trace files the selection engine emits.

A trace is JSON lines. The first line is a header object with a
``schema`` entry (the context attribute descriptors) and optional
``meta`` and ``registry`` entries. Every following line is one logged
request::

    {"t": "...iso...", "values": [...], "request": {...}, "truth": {...}}

This module parses that format on its own so the baselines stay
decoupled from the engine package; the trace file is the only contract
between the two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

KINDS = ("numeric", "cyclic-numeric", "vector-n", "categorical")


class TraceError(ValueError):
    """Trace file does not match the documented layout."""


@dataclass(frozen=True)
class TraceAttribute:
    """One context attribute as declared in the trace header."""

    name: str
    kind: str
    lower: float = 0.0
    upper: float = 1.0
    period: float = 0.0
    ranges: tuple[tuple[float, float], ...] = ()
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class TraceRecord:
    """One logged request: context values, the spoken request, the truth."""

    timestamp: str
    values: tuple
    request_class: str | None
    request_action: str | None
    device: str
    action: str


@dataclass(frozen=True)
class TraceFile:
    schema: tuple[TraceAttribute, ...]
    records: tuple[TraceRecord, ...]
    meta: dict = field(default_factory=dict)


def attribute_from_json(item: dict) -> TraceAttribute:
    try:
        name = item["name"]
        kind = item["kind"]
    except (TypeError, KeyError) as e:
        raise TraceError(f"attribute descriptor missing {e}") from e
    if kind not in KINDS:
        raise TraceError(f"unknown attribute kind {kind!r}")
    if kind == "numeric":
        return TraceAttribute(name, kind, lower=float(item["min"]), upper=float(item["max"]))
    if kind == "cyclic-numeric":
        period = float(item["period"])
        if period <= 0:
            raise TraceError(f"attribute {name!r} has non-positive period")
        return TraceAttribute(name, kind, period=period)
    if kind == "vector-n":
        ranges = tuple((float(lo), float(hi)) for lo, hi in item["ranges"])
        if len(ranges) != int(item["dims"]):
            raise TraceError(f"attribute {name!r} dims disagree with ranges")
        return TraceAttribute(name, kind, ranges=ranges)
    return TraceAttribute(name, kind, labels=tuple(item["labels"]))


def _check_value(attr: TraceAttribute, value, line_no: int) -> None:
    if attr.kind == "vector-n":
        if not isinstance(value, (list, tuple)) or len(value) != len(attr.ranges):
            raise TraceError(f"line {line_no}: {attr.name} expects {len(attr.ranges)} components")
    elif attr.kind == "categorical":
        if not isinstance(value, str):
            raise TraceError(f"line {line_no}: {attr.name} expects a label")
    elif not isinstance(value, (int, float)) or isinstance(value, bool):
        raise TraceError(f"line {line_no}: {attr.name} expects a number")


def record_from_json(schema: Sequence[TraceAttribute], row: dict, line_no: int) -> TraceRecord:
    try:
        values = row["values"]
        request = row["request"]
        truth = row["truth"]
        rec = TraceRecord(
            timestamp=row["t"],
            values=tuple(tuple(v) if isinstance(v, list) else v for v in values),
            request_class=request.get("class"),
            request_action=request.get("action"),
            device=truth["device"],
            action=truth["action"],
        )
    except (TypeError, KeyError) as e:
        raise TraceError(f"line {line_no}: malformed record ({e})") from e
    if len(rec.values) != len(schema):
        raise TraceError(f"line {line_no}: expected {len(schema)} values, got {len(rec.values)}")
    for attr, value in zip(schema, rec.values):
        _check_value(attr, value, line_no)
    return rec


def read_trace(path: str | Path) -> TraceFile:
    """Parse a trace file, validating rows against the header schema."""
    with open(path, encoding="utf-8") as f:
        head_line = f.readline()
        if not head_line.strip():
            raise TraceError("empty trace file")
        try:
            header = json.loads(head_line)
        except json.JSONDecodeError as e:
            raise TraceError(f"header is not valid JSON: {e}") from e
        if not isinstance(header, dict) or "schema" not in header:
            raise TraceError("first line must be a header object with a schema")
        schema = tuple(attribute_from_json(item) for item in header["schema"])
        if not schema:
            raise TraceError("header schema is empty")
        records = []
        for line_no, line in enumerate(f, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceError(f"line {line_no}: invalid JSON: {e}") from e
            records.append(record_from_json(schema, row, line_no))
    return TraceFile(schema=schema, records=tuple(records), meta=header.get("meta") or {})
