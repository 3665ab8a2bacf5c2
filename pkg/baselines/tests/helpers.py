"""Small builders for trace files used across the baseline tests."""

import json
from pathlib import Path

SCHEMA_JSON = [
    {"name": "user", "kind": "categorical", "labels": ["guest", "resident"]},
    {"name": "location", "kind": "vector-n", "dims": 2, "ranges": [[0.0, 14.0], [0.0, 10.0]]},
    {"name": "tod", "kind": "cyclic-numeric", "period": 86400.0},
]


def trace_line(t, values, device, action, request_action="turnOn", request_class=None):
    return json.dumps(
        {
            "t": t,
            "values": values,
            "request": {"class": request_class, "action": request_action},
            "truth": {"device": device, "action": action},
        }
    )


def write_trace_file(path: Path, rows, schema=None, meta=None):
    lines = [json.dumps({"schema": schema or SCHEMA_JSON, "meta": meta or {}})]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
