"""Event-log ingestion, derived context streams, and request traces.

Two input paths feed the replay harness:

* real smart-home logs in the whitespace-separated text form
  ``DATE TIME SENSOR VALUE [ANNOTATION]`` (or the canonical JSON-lines
  form), turned into request traces via a hand-authored sensor map, and
* a seeded synthetic scenario that simulates several weeks of daily
  activities in a small house, emitting a noiseless activity-to-device
  trace.

A trace is a JSON-lines file whose first line is a header (schema plus
metadata, optionally an embedded device registry) followed by one record
per line: timestamp, context snapshot values, the request as the user
would utter it, and the ground-truth (device, action) pair.

Location context comes in two flavors: ``categorical`` (the label of the
most recently triggered motion sensor) and ``coordinate`` (its 2-D
position). The synthetic generator derives both from one random stream,
so traces generated from the same seed in different modes are matched
record for record.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path
from random import Random
from typing import Iterable, Mapping, Sequence, TextIO

from .context import (
    Schema,
    Snapshot,
    categorical,
    cyclic,
    snapshot_from_json,
    snapshot_to_json,
    vector,
)
from .decider import Registry
from .model import Request

UNKNOWN_LABEL = "unknown"
DAY_SECONDS = 86400.0

SPECIFICITIES = ("none", "action", "class+action")


class IngestError(ValueError):
    """Unusable input data or configuration."""


class TraceParseError(IngestError):
    """Malformed line, annotated with its 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# ── raw event logs ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class RawEvent:
    t: datetime
    sensor: str
    value: str
    annotation: str | None = None


@dataclass
class ParseResult:
    events: list[RawEvent]
    problems: list[tuple[int, str]] = field(default_factory=list)


def parse_event_log(source: Iterable[str] | TextIO, strict: bool = False) -> ParseResult:
    """Parse whitespace-separated event lines.

    Malformed lines are collected into ``problems`` and skipped; in strict
    mode the first malformed line raises instead.
    """
    out = ParseResult(events=[])
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 4:
            _problem(out, line_no, "expected DATE TIME SENSOR VALUE", strict)
            continue
        try:
            t = datetime.fromisoformat(f"{parts[0]} {parts[1]}")
        except ValueError:
            _problem(out, line_no, f"bad timestamp {parts[0]} {parts[1]}", strict)
            continue
        annotation = " ".join(parts[4:]) if len(parts) > 4 else None
        out.events.append(RawEvent(t, parts[2], parts[3], annotation))
    return out


def _problem(result: ParseResult, line_no: int, message: str, strict: bool) -> None:
    if strict:
        raise TraceParseError(line_no, message)
    result.problems.append((line_no, message))


def write_canonical(path: str | Path, events: Iterable[RawEvent]) -> None:
    """Write events as JSON-lines ``{t, sensor, value[, annotation]}``."""
    with open(path, "w", encoding="utf-8") as f:
        for e in events:
            row = {
                "t": e.t.isoformat(timespec="microseconds"),
                "sensor": e.sensor,
                "value": e.value,
            }
            if e.annotation is not None:
                row["annotation"] = e.annotation
            f.write(json.dumps(row) + "\n")


def read_canonical(path: str | Path) -> list[RawEvent]:
    events = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                events.append(
                    RawEvent(
                        datetime.fromisoformat(row["t"]),
                        row["sensor"],
                        row["value"],
                        row.get("annotation"),
                    )
                )
            except (ValueError, KeyError) as exc:
                raise TraceParseError(line_no, str(exc)) from exc
    return events


# ── sensor maps ──────────────────────────────────────────────────────────

ROLES = ("motion", "light-device", "other-device")


@dataclass(frozen=True)
class SensorInfo:
    sensor: str
    role: str
    location: str
    coordinates: tuple[float, float] | None = None
    device: str | None = None
    device_class: str | None = None
    actions: tuple[str, ...] = ()


class SensorMap:
    """Sensor roles, locations, coordinates, and device bindings.

    ``activate``/``deactivate`` are the value tokens treated as on/off;
    they default to ON/OFF but are configurable for dataset vintages that
    use OPEN/CLOSE or similar.
    """

    def __init__(
        self,
        sensors: Iterable[SensorInfo],
        *,
        activate: Iterable[str] = ("ON",),
        deactivate: Iterable[str] = ("OFF",),
        extent: tuple[tuple[float, float], tuple[float, float]] | None = None,
    ) -> None:
        self.sensors = {s.sensor: s for s in sensors}
        self.activate = frozenset(activate)
        self.deactivate = frozenset(deactivate)
        self.extent = extent
        for s in self.sensors.values():
            if s.role not in ROLES:
                raise IngestError(f"sensor {s.sensor!r}: unknown role {s.role!r}")
            if s.role != "motion" and s.device is None:
                raise IngestError(f"sensor {s.sensor!r}: device role without device id")

    def motion_sensors(self) -> list[SensorInfo]:
        return [s for s in self.sensors.values() if s.role == "motion"]

    def device_sensors(self) -> list[SensorInfo]:
        return [s for s in self.sensors.values() if s.role != "motion"]

    def require_coordinates(self) -> None:
        missing = [s.sensor for s in self.motion_sensors() if s.coordinates is None]
        if missing:
            raise IngestError(f"coordinate mode needs coordinates for {missing}")
        if self.extent is None:
            raise IngestError("coordinate mode needs an 'extent' in the sensor map")

    @classmethod
    def from_json(cls, d: Mapping) -> "SensorMap":
        sensors = []
        for sid, spec in d.get("sensors", {}).items():
            coords = spec.get("coordinates")
            sensors.append(
                SensorInfo(
                    sensor=sid,
                    role=spec["role"],
                    location=spec["location"],
                    coordinates=tuple(coords) if coords is not None else None,
                    device=spec.get("device"),
                    device_class=spec.get("class"),
                    actions=tuple(spec.get("actions", ())),
                )
            )
        tokens = d.get("tokens", {})
        extent = d.get("extent")
        return cls(
            sensors,
            activate=tokens.get("activate", ("ON",)),
            deactivate=tokens.get("deactivate", ("OFF",)),
            extent=tuple(tuple(r) for r in extent) if extent is not None else None,
        )

    @classmethod
    def load(cls, path: str | Path) -> "SensorMap":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


# ── derived context streams ──────────────────────────────────────────────


def build_experiment_schema(
    smap: SensorMap,
    mode: str,
    *,
    user: str = "resident",
    include_previous: bool = False,
) -> Schema:
    """[user, location(, previous location), second-of-day] for one map."""
    if mode == "categorical":
        labels = sorted({s.location for s in smap.motion_sensors()} | {UNKNOWN_LABEL})

        def loc(name: str):
            return categorical(name, labels)

    elif mode == "coordinate":
        smap.require_coordinates()

        def loc(name: str):
            return vector(name, smap.extent)

    else:
        raise IngestError(f"unknown location mode {mode!r}")
    attrs = [categorical("user", [user]), loc("location")]
    if include_previous:
        attrs.append(loc("prev_location"))
    attrs.append(cyclic("tod", DAY_SECONDS))
    return Schema(tuple(attrs))


def second_of_day(t: datetime) -> float:
    return t.hour * 3600.0 + t.minute * 60.0 + t.second + t.microsecond / 1e6


class ContextStream:
    """Time-indexed derived contexts over a motion-event history.

    Tracks the current location (most recent motion activation), the
    previous location (most recent motion de-activation), and exposes a
    total snapshot for any query time t using only events at or before t.
    """

    def __init__(
        self,
        events: Sequence[RawEvent],
        smap: SensorMap,
        mode: str,
        *,
        user: str = "resident",
        include_previous: bool = False,
        skip_unmapped: bool = True,
    ) -> None:
        self.schema = build_experiment_schema(
            smap, mode, user=user, include_previous=include_previous
        )
        self.user = user
        self.mode = mode
        self.include_previous = include_previous
        categorical_mode = mode == "categorical"
        if categorical_mode:
            cold = UNKNOWN_LABEL
        else:
            (x0, x1), (y0, y1) = smap.extent
            cold = ((x0 + x1) / 2.0, (y0 + y1) / 2.0)  # range midpoint
        self._times: list[datetime] = []
        self._current: list = []
        self._previous: list = []
        cur, prev = cold, cold
        for e in sorted(events, key=lambda e: e.t):
            info = smap.sensors.get(e.sensor)
            if info is None:
                if skip_unmapped:
                    continue
                raise IngestError(f"event references unmapped sensor {e.sensor!r}")
            if info.role != "motion":
                continue
            value = info.location if categorical_mode else info.coordinates
            if e.value in smap.activate:
                cur = value
            elif e.value in smap.deactivate:
                prev = value
            else:
                continue
            self._times.append(e.t)
            self._current.append(cur)
            self._previous.append(prev)
        self._cold = cold

    def snapshot_at(self, t: datetime) -> Snapshot:
        i = bisect_right(self._times, t) - 1
        cur = self._current[i] if i >= 0 else self._cold
        prev = self._previous[i] if i >= 0 else self._cold
        values = [self.user, cur]
        if self.include_previous:
            values.append(prev)
        values.append(second_of_day(t))
        return self.schema.snapshot(values, t)


# ── request traces ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class TraceRecord:
    """One ground-truth request: what the user did, where, and when."""

    snapshot: Snapshot
    request: Request
    device: str
    action: str

    @property
    def t(self) -> datetime:
        return self.snapshot.t


def make_request(
    specificity: str, device_class: str | None, action: str, t: datetime
) -> Request:
    if specificity == "none":
        return Request(t=t)
    if specificity == "action":
        return Request(action=action, t=t)
    if specificity == "class+action":
        return Request(device_class=device_class, action=action, t=t)
    raise IngestError(f"unknown request specificity {specificity!r}")


def build_request_trace(
    events: Sequence[RawEvent],
    stream: ContextStream,
    smap: SensorMap,
    specificity: str = "none",
) -> list[TraceRecord]:
    """One TraceRecord per device on/off event, in time order."""
    records = []
    for e in sorted(events, key=lambda e: e.t):
        info = smap.sensors.get(e.sensor)
        if info is None or info.role == "motion" or info.device is None:
            continue
        if e.value in smap.activate:
            action = "turnOn"
        elif e.value in smap.deactivate:
            action = "turnOff"
        else:
            continue
        records.append(
            TraceRecord(
                snapshot=stream.snapshot_at(e.t),
                request=make_request(specificity, info.device_class, action, e.t),
                device=info.device,
                action=action,
            )
        )
    return records


def trace_header_json(
    schema: Schema,
    meta: Mapping | None = None,
    registry: Registry | None = None,
) -> dict:
    header: dict = {"schema": schema.to_json(), "meta": dict(meta or {})}
    if registry is not None:
        header["registry"] = registry.to_json()
    return header


def trace_row_json(schema: Schema, r: TraceRecord) -> dict:
    return {
        "t": r.t.isoformat(timespec="microseconds"),
        "values": snapshot_to_json(schema, r.snapshot)["values"],
        "request": {
            "class": r.request.device_class,
            "action": r.request.action,
        },
        "truth": {"device": r.device, "action": r.action},
    }


def write_trace(
    path: str | Path,
    schema: Schema,
    records: Iterable[TraceRecord],
    *,
    meta: Mapping | None = None,
    registry: Registry | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(trace_header_json(schema, meta, registry), sort_keys=True) + "\n")
        for r in records:
            f.write(json.dumps(trace_row_json(schema, r), sort_keys=True) + "\n")


@dataclass
class Trace:
    schema: Schema
    records: list[TraceRecord]
    meta: dict
    registry: Registry | None = None


def read_trace(path: str | Path) -> Trace:
    with open(path, encoding="utf-8") as f:
        head = f.readline().strip()
        if not head:
            raise TraceParseError(1, "empty trace file")
        try:
            header = json.loads(head)
            schema = Schema.from_json(header["schema"])
        except (ValueError, KeyError) as exc:
            raise TraceParseError(1, f"bad header: {exc}") from exc
        registry = (
            Registry.from_json(header["registry"]) if "registry" in header else None
        )
        records = []
        for line_no, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                t = datetime.fromisoformat(row["t"])
                snap = snapshot_from_json(schema, {"values": row["values"], "t": row["t"]})
                req = row["request"]
                truth = row["truth"]
                records.append(
                    TraceRecord(
                        snapshot=snap,
                        request=Request(
                            device_class=req.get("class"),
                            action=req.get("action"),
                            t=t,
                        ),
                        device=truth["device"],
                        action=truth["action"],
                    )
                )
            except (ValueError, KeyError) as exc:
                raise TraceParseError(line_no, str(exc)) from exc
    return Trace(schema, records, header.get("meta", {}), registry)


def inject_swap(
    records: Sequence[TraceRecord], device_a: str, device_b: str, at_index: int
) -> list[TraceRecord]:
    """Exchange the two devices in all ground truths from ``at_index`` on.

    Models the two physical devices being swapped in place: the context of
    each request is unchanged, only which device satisfies it flips. The
    transformation is an involution.
    """
    if not 0 <= at_index <= len(records):
        raise IngestError(f"swap index {at_index} outside 0..{len(records)}")
    present = {r.device for r in records}
    for d in (device_a, device_b):
        if d not in present:
            raise IngestError(f"swap device {d!r} never appears in the trace")
    flip = {device_a: device_b, device_b: device_a}
    out = list(records[:at_index])
    for r in records[at_index:]:
        if r.device in flip:
            r = replace(r, device=flip[r.device])
        out.append(r)
    return out


# ── the synthetic scenario ───────────────────────────────────────────────


@dataclass(frozen=True)
class Activity:
    """One recurring daily activity with a fixed device response.

    ``window`` is (start, end) in seconds of day; ``count`` the (min, max)
    occurrences per day; ``prob`` the chance the activity happens at all on
    a given day.
    """

    name: str
    room: str
    window: tuple[float, float]
    device: str
    action: str
    count: tuple[int, int] = (1, 1)
    prob: float = 1.0


@dataclass
class ScenarioConfig:
    days: int
    start: datetime
    user: str
    rooms: dict[str, tuple[tuple[float, float], tuple[float, float]]]
    virtual_sensors: dict[str, tuple[float, float]]
    devices: list[dict]
    activities: list[Activity]
    sleep: Activity
    wake: Activity
    wake_delay: tuple[float, float]  # seconds asleep before the wake record
    news: Activity
    doorbell: Activity
    class_parents: dict[str, str | None]

    def registry(self) -> Registry:
        return Registry(self.class_parents, self.devices)

    def device_positions(self) -> dict[str, tuple[float, float]]:
        out = {}
        for d in self.devices:
            (x0, x1), (y0, y1) = self.rooms[d["room"]]
            out[d["id"]] = ((x0 + x1) / 2.0, (y0 + y1) / 2.0)
        return out

    def extent(self) -> tuple[tuple[float, float], tuple[float, float]]:
        xs = [r[0] for r in self.rooms.values()]
        ys = [r[1] for r in self.rooms.values()]
        return (
            (min(x0 for x0, _ in xs), max(x1 for _, x1 in xs)),
            (min(y0 for y0, _ in ys), max(y1 for _, y1 in ys)),
        )

    def to_json(self) -> dict:
        return {
            "days": self.days,
            "start": self.start.isoformat(timespec="microseconds"),
            "user": self.user,
            "rooms": {k: [list(r[0]), list(r[1])] for k, r in self.rooms.items()},
            "virtual_sensors": {k: list(v) for k, v in self.virtual_sensors.items()},
            "devices": self.devices,
            "activities": [_activity_json(a) for a in self.activities],
            "sleep": _activity_json(self.sleep),
            "wake": _activity_json(self.wake),
            "wake_delay": list(self.wake_delay),
            "news": _activity_json(self.news),
            "doorbell": _activity_json(self.doorbell),
            "class_parents": self.class_parents,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "ScenarioConfig":
        return cls(
            days=int(d["days"]),
            start=datetime.fromisoformat(d["start"]),
            user=d["user"],
            rooms={
                k: (tuple(r[0]), tuple(r[1])) for k, r in d["rooms"].items()
            },
            virtual_sensors={
                k: tuple(v) for k, v in d["virtual_sensors"].items()
            },
            devices=list(d["devices"]),
            activities=[_activity_from_json(a) for a in d["activities"]],
            sleep=_activity_from_json(d["sleep"]),
            wake=_activity_from_json(d["wake"]),
            wake_delay=tuple(d["wake_delay"]),
            news=_activity_from_json(d["news"]),
            doorbell=_activity_from_json(d["doorbell"]),
            class_parents=dict(d["class_parents"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def _activity_json(a: Activity) -> dict:
    return {
        "name": a.name,
        "room": a.room,
        "window": list(a.window),
        "device": a.device,
        "action": a.action,
        "count": list(a.count),
        "prob": a.prob,
    }


def _activity_from_json(d: Mapping) -> Activity:
    return Activity(
        name=d["name"],
        room=d["room"],
        window=tuple(d["window"]),
        device=d["device"],
        action=d["action"],
        count=tuple(d.get("count", (1, 1))),
        prob=float(d.get("prob", 1.0)),
    )


def _hm(h: float, m: float = 0.0) -> float:
    return h * 3600.0 + m * 60.0


def default_scenario(days: int = 56) -> ScenarioConfig:
    """An eight-week household of daily activities in a 14 x 10 floor plan.

    The dining and doorway lights carry roughly half the traffic so that a
    swap between them disturbs the accuracy curve immediately. Evenings mix
    speaker and light interactions inside the same rooms and windows, and
    the news and doorbell records place the user anywhere in the house, so
    location and time alone never fully determine the device; the request
    itself carries the rest of the signal.
    """
    rooms = {
        "bedroom": ((0.0, 4.0), (6.0, 10.0)),
        "bathroom": ((0.0, 4.0), (3.0, 6.0)),
        "office": ((0.0, 4.0), (0.0, 3.0)),
        "kitchen": ((4.0, 9.0), (6.0, 10.0)),
        "living": ((4.0, 9.0), (0.0, 6.0)),
        "dining": ((9.0, 14.0), (5.0, 10.0)),
        "doorway": ((9.0, 14.0), (0.0, 5.0)),
    }
    virtual_sensors = {
        "bedroom_n": (1.0, 9.0),
        "bedroom_s": (3.0, 6.8),
        "bathroom_w": (0.8, 4.5),
        "bathroom_e": (3.2, 5.2),
        "office_w": (0.8, 1.5),
        "office_e": (3.2, 2.2),
        "kitchen_w": (4.8, 8.5),
        "kitchen_m": (6.5, 7.0),
        "kitchen_e": (8.5, 9.2),
        "living_nw": (4.8, 4.8),
        "living_ne": (8.2, 5.0),
        "living_s": (6.5, 1.2),
        "dining_n": (11.5, 9.0),
        "dining_w": (9.8, 6.5),
        "dining_e": (13.2, 6.0),
        "doorway_n": (11.5, 4.0),
        "doorway_s": (11.0, 0.8),
        "doorway_e": (13.2, 2.5),
    }
    on_off = ["turnOn", "turnOff"]
    devices = [
        {"id": "bed_light", "classes": ["dimmable"], "actions": on_off, "room": "bedroom"},
        {"id": "bath_light", "classes": ["light"], "actions": on_off, "room": "bathroom"},
        {"id": "office_light", "classes": ["light"], "actions": on_off, "room": "office"},
        {"id": "kitchen_light", "classes": ["light"], "actions": on_off, "room": "kitchen"},
        {"id": "living_light", "classes": ["dimmable"], "actions": on_off, "room": "living"},
        {"id": "dining_light", "classes": ["light"], "actions": on_off, "room": "dining"},
        {"id": "doorway_light", "classes": ["light"], "actions": on_off, "room": "doorway"},
        {"id": "bedroom_speaker", "classes": ["speaker"], "actions": ["play", "stop"], "room": "bedroom"},
        {"id": "living_speaker", "classes": ["speaker"], "actions": ["play", "stop"], "room": "living"},
        {"id": "doorbell_cam", "classes": ["camera"], "actions": on_off, "room": "doorway"},
    ]
    acts = [
        # mornings
        Activity("morning_bath", "bathroom", (_hm(6, 5), _hm(6, 45)), "bath_light", "turnOn"),
        Activity("morning_bath_done", "bathroom", (_hm(6, 45), _hm(7, 10)), "bath_light", "turnOff"),
        Activity("breakfast_prep", "kitchen", (_hm(6, 40), _hm(7, 10)), "kitchen_light", "turnOn"),
        Activity("breakfast", "dining", (_hm(7, 10), _hm(7, 50)), "dining_light", "turnOn"),
        Activity("breakfast_done", "dining", (_hm(7, 50), _hm(8, 10)), "dining_light", "turnOff"),
        Activity("leave_home", "doorway", (_hm(8, 10), _hm(8, 40)), "doorway_light", "turnOn"),
        Activity("leave_home_off", "doorway", (_hm(8, 40), _hm(9, 0)), "doorway_light", "turnOff"),
        # daytime
        Activity("office_work", "office", (_hm(9, 0), _hm(17, 0)), "office_light", "turnOn", (3, 5)),
        Activity("office_break", "office", (_hm(9, 30), _hm(17, 30)), "office_light", "turnOff", (3, 5)),
        Activity("lunch", "dining", (_hm(12, 0), _hm(13, 0)), "dining_light", "turnOn"),
        Activity("lunch_done", "dining", (_hm(13, 0), _hm(13, 30)), "dining_light", "turnOff"),
        Activity("kitchen_visits", "kitchen", (_hm(9, 0), _hm(20, 30)), "kitchen_light", "turnOn", (4, 6)),
        Activity("kitchen_done", "kitchen", (_hm(9, 30), _hm(21, 0)), "kitchen_light", "turnOff", (4, 6)),
        Activity("dining_passes", "dining", (_hm(8, 30), _hm(21, 0)), "dining_light", "turnOn", (15, 19)),
        Activity("dining_passes_off", "dining", (_hm(8, 30), _hm(21, 0)), "dining_light", "turnOff", (15, 19)),
        Activity("doorway_passes", "doorway", (_hm(9, 0), _hm(21, 30)), "doorway_light", "turnOn", (14, 18)),
        Activity("doorway_passes_off", "doorway", (_hm(9, 0), _hm(21, 30)), "doorway_light", "turnOff", (14, 18)),
        Activity("return_home", "doorway", (_hm(17, 30), _hm(18, 0)), "doorway_light", "turnOn"),
        # evenings
        Activity("dinner", "dining", (_hm(18, 40), _hm(19, 30)), "dining_light", "turnOn"),
        Activity("dinner_done", "dining", (_hm(19, 30), _hm(20, 0)), "dining_light", "turnOff"),
        Activity("living_relax", "living", (_hm(19, 0), _hm(22, 0)), "living_light", "turnOn", (2, 4)),
        Activity("living_relax_off", "living", (_hm(19, 30), _hm(22, 30)), "living_light", "turnOff", (2, 4)),
        Activity("evening_music", "living", (_hm(19, 0), _hm(22, 0)), "living_speaker", "play", (1, 2)),
        Activity("evening_music_stop", "living", (_hm(19, 30), _hm(22, 30)), "living_speaker", "stop", (1, 2)),
        Activity("bedroom_evening", "bedroom", (_hm(21, 0), _hm(22, 30)), "bed_light", "turnOn"),
        Activity("bedtime_music", "bedroom", (_hm(21, 0), _hm(22, 30)), "bedroom_speaker", "play", prob=0.7),
        Activity("bedtime_music_stop", "bedroom", (_hm(22, 0), _hm(23, 0)), "bedroom_speaker", "stop", prob=0.7),
    ]
    sleep = Activity("sleep", "bedroom", (_hm(22, 30), _hm(23, 15)), "bed_light", "turnOff")
    wake = Activity("wake_up", "bedroom", (0.0, 0.0), "bedroom_speaker", "play")
    news = Activity("evening_news", "anywhere", (_hm(18, 0), _hm(18, 0)), "living_speaker", "play", prob=0.85)
    doorbell = Activity("doorbell", "anywhere", (_hm(8, 0), _hm(21, 0)), "doorbell_cam", "turnOn", (0, 2))
    return ScenarioConfig(
        days=days,
        start=datetime(2024, 3, 4),
        user="resident",
        rooms=rooms,
        virtual_sensors=virtual_sensors,
        devices=devices,
        activities=acts,
        sleep=sleep,
        wake=wake,
        wake_delay=(_hm(6, 45), _hm(7, 45)),
        news=news,
        doorbell=doorbell,
        class_parents={
            "light": None,
            "dimmable": "light",
            "speaker": None,
            "camera": None,
        },
    )


@dataclass
class _Draw:
    """One scenario occurrence before mode-specific materialization.

    ``fixed_specificity`` overrides the trace-wide request specificity for
    event-driven records (a doorbell press names its device class by
    itself, however vague the user's other requests are).
    """

    t: datetime
    xy: tuple[float, float]
    device: str
    action: str
    fixed_specificity: str | None = None


def synth_schema(config: ScenarioConfig, mode: str) -> Schema:
    if mode == "coordinate":
        loc = vector("location", config.extent())
    elif mode == "categorical":
        labels = sorted(config.virtual_sensors) + [UNKNOWN_LABEL]
        loc = categorical("location", labels)
    else:
        raise IngestError(f"unknown location mode {mode!r}")
    return Schema(
        (categorical("user", [config.user]), loc, cyclic("tod", DAY_SECONDS))
    )


def nearest_sensor_label(
    sensors: Mapping[str, tuple[float, float]], xy: tuple[float, float]
) -> str:
    """The virtual sensor a position would trip (ties to the smaller label)."""
    return min(
        sorted(sensors),
        key=lambda k: math.dist(sensors[k], xy),
    )


def generate_synthetic_scenario(
    config: ScenarioConfig,
    seed: int,
    mode: str = "coordinate",
    specificity: str = "none",
) -> Trace:
    """A deterministic activity-driven trace for one (config, seed).

    The random stream is consumed identically regardless of ``mode`` and
    ``specificity``: all randomness happens before materialization, so the
    same seed yields matched traces across modes.
    """
    rng = Random(seed)
    draws: list[_Draw] = []

    def room_point(room: str) -> tuple[float, float]:
        # "anywhere" records the user at an arbitrary spot in the house
        if room == "anywhere":
            (x0, x1), (y0, y1) = config.extent()
        else:
            (x0, x1), (y0, y1) = config.rooms[room]
        return (rng.uniform(x0, x1), rng.uniform(y0, y1))

    def emit(day: int, second: float, act: Activity, fixed: str | None = None) -> None:
        t = config.start + timedelta(days=day, seconds=second)
        draws.append(_Draw(t, room_point(act.room), act.device, act.action, fixed))

    for day in range(config.days):
        for act in config.activities:
            if act.prob < 1.0 and rng.random() >= act.prob:
                continue
            for _ in range(rng.randint(*act.count)):
                emit(day, rng.uniform(*act.window), act)
        # the structural records: sleep, then a wake-up after every sleep
        sleep_s = rng.uniform(*config.sleep.window)
        emit(day, sleep_s, config.sleep)
        emit(day, sleep_s + rng.uniform(*config.wake_delay), config.wake)
        if rng.random() < config.news.prob:
            emit(day, config.news.window[0], config.news)
        for _ in range(rng.randint(*config.doorbell.count)):
            emit(day, rng.uniform(*config.doorbell.window), config.doorbell, "class+action")

    draws.sort(key=lambda d: d.t)
    schema = synth_schema(config, mode)
    class_of = {d["id"]: d["classes"][0] for d in config.devices}
    records = []
    for d in draws:
        loc = (
            d.xy
            if mode == "coordinate"
            else nearest_sensor_label(config.virtual_sensors, d.xy)
        )
        snap = schema.snapshot([config.user, loc, second_of_day(d.t)], d.t)
        spec = d.fixed_specificity or specificity
        records.append(
            TraceRecord(
                snapshot=snap,
                request=make_request(spec, class_of[d.device], d.action, d.t),
                device=d.device,
                action=d.action,
            )
        )
    meta = {
        "generator": "synthetic",
        "seed": seed,
        "mode": mode,
        "specificity": specificity,
        "days": config.days,
        "user": config.user,
        "device_positions": {
            k: list(v) for k, v in sorted(config.device_positions().items())
        },
    }
    return Trace(schema, records, meta, config.registry())
