import json

import pytest

from ctxact_baselines import TraceError, read_trace
from helpers import SCHEMA_JSON, trace_line, write_trace_file


@pytest.fixture
def tiny_trace(tmp_path):
    rows = [
        trace_line("2024-03-04T07:00:00", ["resident", [2.0, 8.0], 25200.0], "bed_light", "turnOn"),
        trace_line("2024-03-04T08:00:00", ["resident", [6.5, 8.0], 28800.0], "kitchen_light", "turnOn"),
        trace_line("2024-03-04T21:30:00", ["resident", [2.1, 7.9], 77400.0], "bed_light", "turnOff"),
    ]
    return write_trace_file(tmp_path / "tiny.jsonl", rows)


def test_reads_header_and_records(tiny_trace):
    trace = read_trace(tiny_trace)
    assert [a.name for a in trace.schema] == ["user", "location", "tod"]
    assert [a.kind for a in trace.schema] == ["categorical", "vector-n", "cyclic-numeric"]
    assert trace.schema[0].labels == ("guest", "resident")
    assert trace.schema[1].ranges == ((0.0, 14.0), (0.0, 10.0))
    assert trace.schema[2].period == 86400.0
    assert len(trace.records) == 3
    first = trace.records[0]
    assert first.device == "bed_light"
    assert first.action == "turnOn"
    assert first.request_action == "turnOn"
    assert first.request_class is None
    assert first.values == ("resident", (2.0, 8.0), 25200.0)


def test_meta_passes_through(tmp_path):
    p = write_trace_file(
        tmp_path / "t.jsonl",
        [trace_line("2024-03-04T07:00:00", ["resident", [1.0, 1.0], 0.0], "d", "a")],
        meta={"seed": 7, "generator": "synthetic"},
    )
    assert read_trace(p).meta == {"seed": 7, "generator": "synthetic"}


def test_blank_lines_are_skipped(tmp_path):
    p = tmp_path / "t.jsonl"
    row = trace_line("2024-03-04T07:00:00", ["resident", [1.0, 1.0], 0.0], "d", "a")
    p.write_text(
        json.dumps({"schema": SCHEMA_JSON}) + "\n\n" + row + "\n\n", encoding="utf-8"
    )
    assert len(read_trace(p).records) == 1


def test_empty_file_rejected(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text("", encoding="utf-8")
    with pytest.raises(TraceError, match="empty"):
        read_trace(p)


def test_header_must_carry_schema(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text(json.dumps({"meta": {}}) + "\n", encoding="utf-8")
    with pytest.raises(TraceError, match="schema"):
        read_trace(p)


def test_unknown_kind_rejected(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text(
        json.dumps({"schema": [{"name": "x", "kind": "fancy"}]}) + "\n", encoding="utf-8"
    )
    with pytest.raises(TraceError, match="fancy"):
        read_trace(p)


def test_value_count_mismatch_names_the_line(tmp_path):
    bad = trace_line("2024-03-04T07:00:00", ["resident", [1.0, 1.0]], "d", "a")
    p = write_trace_file(tmp_path / "t.jsonl", [bad])
    with pytest.raises(TraceError, match="line 2"):
        read_trace(p)


def test_vector_arity_checked(tmp_path):
    bad = trace_line("2024-03-04T07:00:00", ["resident", [1.0], 0.0], "d", "a")
    p = write_trace_file(tmp_path / "t.jsonl", [bad])
    with pytest.raises(TraceError, match="location"):
        read_trace(p)


def test_categorical_value_must_be_label_typed(tmp_path):
    bad = trace_line("2024-03-04T07:00:00", [3, [1.0, 1.0], 0.0], "d", "a")
    p = write_trace_file(tmp_path / "t.jsonl", [bad])
    with pytest.raises(TraceError, match="user"):
        read_trace(p)


def test_invalid_row_json_names_the_line(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text(json.dumps({"schema": SCHEMA_JSON}) + "\n{nope\n", encoding="utf-8")
    with pytest.raises(TraceError, match="line 2"):
        read_trace(p)


def test_cyclic_period_must_be_positive(tmp_path):
    schema = [{"name": "tod", "kind": "cyclic-numeric", "period": 0.0}]
    p = tmp_path / "t.jsonl"
    p.write_text(json.dumps({"schema": schema}) + "\n", encoding="utf-8")
    with pytest.raises(TraceError, match="period"):
        read_trace(p)
