"""Command-line behavior: flags, config overlays, exit codes, file outputs."""

import io
import json

import pytest

from ctxact.cli import RunConfig, main
from ctxact.decider import Decider, Registry
from ctxact.harness import read_csv_rows
from ctxact.ingest import default_scenario, generate_synthetic_scenario, read_trace, write_trace

SENSOR_MAP = {
    "sensors": {
        "M_kitchen": {"role": "motion", "location": "kitchen", "coordinates": [2.0, 1.0]},
        "M_bedroom": {"role": "motion", "location": "bedroom", "coordinates": [8.0, 3.0]},
        "L_kitchen": {
            "role": "light-device",
            "location": "kitchen",
            "coordinates": [2.5, 1.0],
            "device": "kitchen_light",
            "class": "light",
            "actions": ["turnOn", "turnOff"],
        },
    },
    "extent": [[0.0, 10.0], [0.0, 5.0]],
}

EVENT_LINES = """\
2024-03-04 06:00:00 M_kitchen ON
2024-03-04 06:10:00 L_kitchen ON
2024-03-04 06:20:00 M_kitchen OFF
2024-03-04 06:21:00 M_bedroom ON
2024-03-04 06:30:00 L_kitchen OFF
"""

REGISTRY = {
    "classes": {"light": None},
    "devices": [{"id": "kitchen_light", "classes": ["light"], "actions": ["turnOn", "turnOff"]}],
}


@pytest.fixture
def small_inputs(tmp_path):
    events = tmp_path / "events.txt"
    events.write_text(EVENT_LINES, encoding="utf-8")
    smap = tmp_path / "sensors.json"
    smap.write_text(json.dumps(SENSOR_MAP), encoding="utf-8")
    registry = tmp_path / "registry.json"
    registry.write_text(json.dumps(REGISTRY), encoding="utf-8")
    return events, smap, registry


@pytest.fixture
def synth_trace(tmp_path):
    tr = generate_synthetic_scenario(
        default_scenario(days=3), seed=7, mode="coordinate", specificity="action"
    )
    path = tmp_path / "trace.jsonl"
    write_trace(path, tr.schema, tr.records, meta=tr.meta, registry=tr.registry)
    return path


# ── ingest ───────────────────────────────────────────────────────────────


def test_ingest_writes_events_and_trace(small_inputs, tmp_path, capsys):
    events, smap, registry = small_inputs
    out = tmp_path / "out"
    rc = main(
        [
            "ingest",
            str(events),
            "--sensor-map",
            str(smap),
            "--registry",
            str(registry),
            "--out",
            str(out),
            "--specificity",
            "action",
        ]
    )
    assert rc == 0
    assert (out / "events.jsonl").exists()
    trace = read_trace(out / "trace.jsonl")
    assert len(trace.records) == 2  # two L_kitchen events
    assert all(r.request.action is not None for r in trace.records)
    assert trace.registry is not None
    assert "2 request records" in capsys.readouterr().out


def test_ingest_coordinate_mode_needs_extent_and_coords(small_inputs, tmp_path, capsys):
    events, smap, _ = small_inputs
    bare = dict(SENSOR_MAP)
    bare.pop("extent")
    smap2 = tmp_path / "flat.json"
    smap2.write_text(json.dumps(bare), encoding="utf-8")
    rc = main(
        [
            "ingest",
            str(events),
            "--sensor-map",
            str(smap2),
            "--location-mode",
            "coordinate",
            "--out",
            str(tmp_path / "o"),
        ]
    )
    assert rc == 1
    assert "extent" in capsys.readouterr().err


def test_ingest_warns_about_unmapped_sensors(small_inputs, tmp_path, capsys):
    events, smap, _ = small_inputs
    events.write_text(EVENT_LINES + "2024-03-04 07:00:00 M_ghost ON\n", encoding="utf-8")
    rc = main(["ingest", str(events), "--sensor-map", str(smap), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert "M_ghost" in capsys.readouterr().err


def test_ingest_missing_sensor_map_is_an_error(small_inputs, tmp_path, capsys):
    events, _, _ = small_inputs
    rc = main(["ingest", str(events), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "sensor-map" in capsys.readouterr().err


# ── replay ───────────────────────────────────────────────────────────────


def test_replay_writes_reports_and_repeats_byte_identically(synth_trace, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main(
            ["replay", str(synth_trace), "--out", str(out), "--seed", "7", "--radius", "0.3"]
        )
        assert rc == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    doc = json.loads((a / "summary.json").read_text())
    assert doc["seed"] == 7
    assert doc["config"]["engine"]["default_radius"] == 0.3
    rows = read_csv_rows(a / "report.csv")
    assert len(rows) == len(read_trace(synth_trace).records)


def test_replay_swap_flag_requires_at(synth_trace, tmp_path, capsys):
    rc = main(["replay", str(synth_trace), "--swap", "dining_light", "doorway_light"])
    assert rc == 1
    assert "--at" in capsys.readouterr().err


def test_replay_swap_changes_the_tail(synth_trace, tmp_path):
    plain, swapped = tmp_path / "p", tmp_path / "s"
    main(["replay", str(synth_trace), "--out", str(plain), "--radius", "0.3"])
    rc = main(
        [
            "replay",
            str(synth_trace),
            "--out",
            str(swapped),
            "--radius",
            "0.3",
            "--swap",
            "dining_light",
            "doorway_light",
            "--at",
            "100",
        ]
    )
    assert rc == 0
    assert (plain / "summary.json").read_text() != (swapped / "summary.json").read_text()


def test_replay_baseline_emits_same_csv_schema(synth_trace, tmp_path):
    out = tmp_path / "base"
    rc = main(["replay", str(synth_trace), "--out", str(out), "--baseline", "nearest"])
    assert rc == 0
    rows = read_csv_rows(out / "report.csv")
    assert rows and rows[0].index == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["config"]["engine"] == {"baseline": "nearest"}


def test_replay_fails_cleanly_without_registry(tmp_path, capsys):
    tr = generate_synthetic_scenario(
        default_scenario(days=1), seed=7, mode="coordinate", specificity="action"
    )
    bare = tmp_path / "bare.jsonl"
    write_trace(bare, tr.schema, tr.records)  # no registry embedded
    out = tmp_path / "out"
    rc = main(["replay", str(bare), "--out", str(out)])
    assert rc == 1
    assert "registry" in capsys.readouterr().err
    assert not (out / "report.csv").exists()


def test_replay_error_leaves_no_partial_outputs(synth_trace, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(
        ["replay", str(synth_trace), "--out", str(out), "--swap", "nope", "zip", "--at", "1"]
    )
    assert rc == 1
    assert not (out / "report.csv").exists()
    assert not (out / "summary.json").exists()


def test_replay_config_file_with_flag_override(synth_trace, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps({"hyperparameters": {"default_radius": 0.05}, "seed": 3}), encoding="utf-8"
    )
    out = tmp_path / "out"
    rc = main(
        [
            "replay",
            str(synth_trace),
            "--config",
            str(cfg),
            "--out",
            str(out),
            "--radius",
            "0.4",
            "--limit",
            "50",
        ]
    )
    assert rc == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["config"]["engine"]["default_radius"] == 0.4  # flag wins
    assert doc["seed"] == 3  # config survives where no flag given
    assert doc["records"] == 50


def test_replay_multi_config_sweeps_into_subdirs(synth_trace, tmp_path):
    c1 = tmp_path / "wide.json"
    c1.write_text(json.dumps({"hyperparameters": {"default_radius": 0.4}}), encoding="utf-8")
    c2 = tmp_path / "narrow.json"
    c2.write_text(json.dumps({"hyperparameters": {"default_radius": 0.1}}), encoding="utf-8")
    out = tmp_path / "sweep"
    rc = main(
        [
            "replay",
            str(synth_trace),
            "--config",
            str(c1),
            "--config",
            str(c2),
            "--out",
            str(out),
            "--jobs",
            "2",
            "--limit",
            "80",
        ]
    )
    assert rc == 0
    assert (out / "00_wide" / "summary.json").exists()
    assert (out / "01_narrow" / "summary.json").exists()


def test_run_config_rejects_unknown_keys(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"radius": 0.3}), encoding="utf-8")
    with pytest.raises(ValueError, match="unknown config keys"):
        RunConfig.from_file(bad)


# ── repl ─────────────────────────────────────────────────────────────────


def repl_args(tmp_path, trace_path, extra=()):
    trace = read_trace(trace_path)
    registry = tmp_path / "reg.json"
    trace.registry.dump(registry)
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(trace.schema.to_json()), encoding="utf-8")
    return ["repl", "--registry", str(registry), "--schema", str(schema), *extra]


def run_repl(monkeypatch, args, script):
    monkeypatch.setattr("sys.stdin", io.StringIO(script))
    return main(args)


def test_repl_accept_moves_utility_up(synth_trace, tmp_path, monkeypatch, capsys):
    model_path = tmp_path / "m.json"
    script = (
        "ctx user resident\n"
        "ctx location 11.5 7.5\n"
        "time 2024-03-04T19:30:00\n"
        "act light turnOn\n"
        "y\n"
        "act light turnOn\n"
        "quit\n"
    )
    rc = run_repl(
        monkeypatch,
        repl_args(tmp_path, synth_trace, ["--save-model", str(model_path)]),
        script,
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "accepted" in out
    # second identical request proposes the approved device with higher utility
    first, second = [l for l in out.splitlines() if l.startswith("proposal:")]
    assert first.split()[1] == second.split()[1]
    assert float(second.split("utility ")[1].split(")")[0]) > 0.5
    dec = Decider.load(model_path)
    assert any(m.states for m in dec.models.values())


def test_repl_rejection_walks_to_next_proposal(synth_trace, tmp_path, monkeypatch, capsys):
    script = (
        "ctx user resident\n"
        "ctx location 2.0 2.0\n"
        "ctx tod 43200\n"
        "act light turnOn\n"
        "n\n"
        "n\n"
        "quit\n"
    )
    rc = run_repl(monkeypatch, repl_args(tmp_path, synth_trace), script)
    assert rc == 0
    proposals = [l for l in capsys.readouterr().out.splitlines() if l.startswith("proposal:")]
    assert len(proposals) == 3
    assert len({p.split()[1] for p in proposals}) == 3  # all different devices


def test_repl_unknown_names_keep_session_alive(synth_trace, tmp_path, monkeypatch, capsys):
    script = "act blender\nact light explode\nquit\n"
    rc = run_repl(monkeypatch, repl_args(tmp_path, synth_trace), script)
    assert rc == 0
    out = capsys.readouterr().out
    assert "unknown class 'blender'" in out
    assert "unknown action 'explode'" in out


def test_repl_incomplete_context_message(synth_trace, tmp_path, monkeypatch, capsys):
    rc = run_repl(monkeypatch, repl_args(tmp_path, synth_trace), "act\nquit\n")
    assert rc == 0
    assert "context incomplete" in capsys.readouterr().out


def test_repl_appends_accepted_requests_as_trace(synth_trace, tmp_path, monkeypatch):
    session = tmp_path / "session.jsonl"
    script = (
        "ctx user resident\n"
        "ctx location 5.0 5.0\n"
        "ctx tod 3600\n"
        "act light turnOn\n"
        "y\n"
        "quit\n"
    )
    rc = run_repl(
        monkeypatch,
        repl_args(tmp_path, synth_trace, ["--append-trace", str(session)]),
        script,
    )
    assert rc == 0
    logged = read_trace(session)
    assert len(logged.records) == 1
    assert logged.records[0].action == "turnOn"
    assert logged.meta == {"source": "repl"}


# ── inspect ──────────────────────────────────────────────────────────────


def trained_model(synth_trace, tmp_path):
    model = tmp_path / "model.json"
    rc = main(
        [
            "replay",
            str(synth_trace),
            "--out",
            str(tmp_path / "run"),
            "--limit",
            "60",
            "--save-model",
            str(model),
        ]
    )
    assert rc == 0
    return model


def test_inspect_prints_states_and_utilities(synth_trace, tmp_path, capsys):
    model = trained_model(synth_trace, tmp_path)
    rc = main(["inspect", str(model)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "state 0:" in out and "utilities:" in out and "bounds:" in out


def test_inspect_json_round_trips(synth_trace, tmp_path, capsys):
    model = trained_model(synth_trace, tmp_path)
    capsys.readouterr()  # drop the replay's own output
    rc = main(["inspect", str(model), "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    again = Decider.from_json(doc)
    assert again.to_json() == doc


def test_inspect_corrupt_file_reports_offset(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"registry": {', encoding="utf-8")
    rc = main(["inspect", str(bad)])
    assert rc == 1
    assert "offset" in capsys.readouterr().err
