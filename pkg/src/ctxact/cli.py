"""Command-line surface: ingest event logs, replay traces, poke models by hand.

Every subcommand exits 0 on success and 1 on any error. Output files are
written to a temp name and renamed into place, so a failed run leaves no
partial artifacts behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .context import Kind, Schema
from .decider import Decider, Registry
from .harness import (
    NearestDeviceBaseline,
    build_report,
    replay,
    summary_json,
    write_csv,
)
from .ingest import (
    ContextStream,
    SensorMap,
    Trace,
    TraceRecord,
    build_experiment_schema,
    build_request_trace,
    inject_swap,
    parse_event_log,
    second_of_day,
    trace_header_json,
    trace_row_json,
    read_trace,
    write_canonical,
    write_trace,
)
from .model import Hyperparameters, Request, state_entropy


class CliError(ValueError):
    """Bad flag combination or unusable configuration."""


@contextmanager
def _atomic(path: Path):
    """Yield a temp path; rename over the target only if the body succeeds."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)


# ── run configuration ────────────────────────────────────────────────────


_CONFIG_KEYS = {
    "schema",
    "sensor_map",
    "registry",
    "hyperparameters",
    "specificity",
    "location_mode",
    "seed",
    "swap",
    "out",
}

_HP_FLAGS = {
    "radius": "default_radius",
    "knn_k": "knn_k",
    "reward": "reward",
    "entropy_threshold": "entropy_threshold",
    "required_gain": "required_gain",
    "split_points": "split_points",
    "cache_capacity": "cache_capacity",
    "recovery_window": "recovery_window",
    "implicit_weight": "implicit_weight",
}


@dataclass
class RunConfig:
    """Paths and knobs for one run; JSON-loadable, flags override fields."""

    schema: str | None = None
    sensor_map: str | None = None
    registry: str | None = None
    hyperparameters: dict = field(default_factory=dict)
    specificity: str = "none"
    location_mode: str = "categorical"
    seed: int = 0
    swap: tuple[str, str, int] | None = None
    out: str = "."

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        if raw.get("swap") is not None:
            a, b, at = raw["swap"]
            raw["swap"] = (str(a), str(b), int(at))
        return cls(**raw)

    def hp(self) -> Hyperparameters:
        return Hyperparameters(**self.hyperparameters)

    def require(self, *names: str) -> None:
        for n in names:
            p = getattr(self, n)
            if p is None:
                raise CliError(f"--{n.replace('_', '-')} required (flag or config)")
            if not Path(p).exists():
                raise CliError(f"{n.replace('_', '-')} file not found: {p}")


def _merge_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, then every flag the user actually passed."""
    cpath = getattr(args, "config", None)
    cfg = RunConfig.from_file(cpath) if cpath else RunConfig()
    for name in ("schema", "sensor_map", "registry", "specificity", "location_mode", "seed", "out"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    overrides = {}
    for flag, hp_name in _HP_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            overrides[hp_name] = v
    for item in getattr(args, "radius_override", None) or ():
        name, sep, val = item.partition("=")
        if not sep or not name:
            raise CliError(f"--radius-override wants NAME=VALUE, got {item!r}")
        per_attr = dict(cfg.hyperparameters.get("radius_overrides", {}))
        per_attr[name] = float(val)
        cfg.hyperparameters["radius_overrides"] = per_attr
    cfg.hyperparameters = {**cfg.hyperparameters, **overrides}
    if getattr(args, "swap", None):
        if getattr(args, "at", None) is None:
            raise CliError("--swap needs --at N")
        cfg.swap = (args.swap[0], args.swap[1], args.at)
    cfg.hp()  # validate ranges early
    return cfg


# ── ingest ───────────────────────────────────────────────────────────────


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    cfg.require("sensor_map")
    smap = SensorMap.load(cfg.sensor_map)
    with open(args.events, encoding="utf-8") as f:
        parsed = parse_event_log(f, strict=args.strict)
    for line_no, msg in parsed.problems:
        print(f"warning: line {line_no}: {msg}", file=sys.stderr)
    unmapped = sorted({e.sensor for e in parsed.events} - set(smap.sensors))
    if unmapped:
        print(f"warning: skipping unmapped sensors: {', '.join(unmapped)}", file=sys.stderr)
    stream = ContextStream(
        parsed.events,
        smap,
        cfg.location_mode,
        user=args.user,
        include_previous=args.include_previous,
    )
    records = build_request_trace(parsed.events, stream, smap, cfg.specificity)
    registry = Registry.load(cfg.registry) if cfg.registry else None
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    canon = outdir / "events.jsonl"
    with _atomic(canon) as tmp:
        write_canonical(tmp, parsed.events)
    trace_path = outdir / "trace.jsonl"
    meta = {
        "source": str(args.events),
        "specificity": cfg.specificity,
        "location_mode": cfg.location_mode,
    }
    with _atomic(trace_path) as tmp:
        write_trace(tmp, stream.schema, records, meta=meta, registry=registry)
    print(
        f"parsed {len(parsed.events)} events ({len(parsed.problems)} problem lines), "
        f"{len(records)} request records"
    )
    print(f"wrote {canon} and {trace_path}")
    return 0


# ── replay ───────────────────────────────────────────────────────────────


def _location_index(schema: Schema) -> int:
    for i, attr in enumerate(schema):
        if attr.name == "location":
            return i
    return 1


def _nearest_baseline(trace: Trace, cfg: RunConfig) -> NearestDeviceBaseline:
    positions = trace.meta.get("device_positions")
    label_positions: dict[str, tuple[float, float]] = {}
    if cfg.sensor_map and Path(cfg.sensor_map).exists():
        smap = SensorMap.load(cfg.sensor_map)
        if positions is None:
            positions = {
                s.device: s.coordinates
                for s in smap.sensors.values()
                if s.device is not None and s.coordinates is not None
            }
        sums: dict[str, list[float]] = {}
        for s in smap.motion_sensors():
            if s.coordinates is None:
                continue
            acc = sums.setdefault(s.location, [0.0, 0.0, 0.0])
            acc[0] += s.coordinates[0]
            acc[1] += s.coordinates[1]
            acc[2] += 1.0
        label_positions = {k: (x / n, y / n) for k, (x, y, n) in sums.items()}
    if not positions:
        raise CliError("nearest baseline needs device positions (trace meta or sensor map)")
    return NearestDeviceBaseline(
        trace.registry,
        {k: tuple(v) for k, v in positions.items()},
        location_index=_location_index(trace.schema),
        label_positions=label_positions,
    )


def _replay_one(trace_path: str, flags: dict) -> str:
    """One full replay run: load, swap, replay, write reports."""
    args = argparse.Namespace(**flags)
    cfg = _merge_config(args)
    trace = read_trace(trace_path)
    registry = Registry.load(cfg.registry) if cfg.registry else trace.registry
    if registry is None:
        raise CliError("trace carries no registry; pass --registry")
    records = trace.records
    if getattr(args, "limit", None):
        records = records[: args.limit]
    if cfg.swap is not None:
        a, b, at = cfg.swap
        records = inject_swap(records, a, b, at)
    run = Trace(trace.schema, list(records), dict(trace.meta), registry)
    if getattr(args, "baseline", None) == "nearest":
        engine: object = _nearest_baseline(run, cfg)
        engine_echo: dict = {"baseline": "nearest"}
    else:
        hp = cfg.hp()
        engine = Decider(registry, run.schema, hp=hp)
        engine_echo = hp.to_json()
    episodes = replay(run, engine, max_proposals=getattr(args, "max_proposals", None))
    report = build_report(episodes, window=getattr(args, "window", None) or 30)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with _atomic(outdir / "report.csv") as tmp:
        write_csv(tmp, episodes)
    summary = summary_json(
        report,
        config={
            "engine": engine_echo,
            "specificity": cfg.specificity,
            "swap": list(cfg.swap) if cfg.swap else None,
            "trace": str(trace_path),
        },
        seed=cfg.seed,
    )
    with _atomic(outdir / "summary.json") as tmp:
        tmp.write_text(summary, encoding="utf-8")
    save = getattr(args, "save_model", None)
    if save and isinstance(engine, Decider):
        with _atomic(Path(save)) as tmp:
            engine.dump(tmp)
    return (
        f"fda={report.fda:.4f} afr={report.afr:.3f} within_two={report.within_two:.4f} "
        f"records={report.records} -> {outdir}"
    )


_TASK_FLAG_NAMES = (
    "schema",
    "sensor_map",
    "registry",
    "specificity",
    "location_mode",
    "seed",
    "out",
    "radius",
    "knn_k",
    "reward",
    "entropy_threshold",
    "required_gain",
    "split_points",
    "cache_capacity",
    "recovery_window",
    "implicit_weight",
    "radius_override",
    "swap",
    "at",
    "baseline",
    "max_proposals",
    "window",
    "limit",
    "save_model",
)


def cmd_replay(args: argparse.Namespace) -> int:
    configs: list[str | None] = list(args.config) if args.config else [None]
    if len(configs) > 1 and args.save_model:
        raise CliError("--save-model only works with a single config")
    tasks = []
    for i, cpath in enumerate(configs):
        flags = {name: getattr(args, name, None) for name in _TASK_FLAG_NAMES}
        flags["config"] = cpath
        if len(configs) > 1:
            stem = Path(cpath).stem if cpath else "default"
            flags["out"] = str(Path(args.out or ".") / f"{i:02d}_{stem}")
        tasks.append((args.trace, flags))
    if len(tasks) == 1 or args.jobs <= 1:
        for trace_path, flags in tasks:
            print(_replay_one(trace_path, flags))
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for line in pool.map(_replay_one, *zip(*tasks)):
                print(line)
    return 0


# ── repl ─────────────────────────────────────────────────────────────────


_REPL_HELP = """\
commands:
  ctx <attr> <value...>   set one context attribute (vectors take one number per axis)
  time <iso-datetime>     set the clock (also refreshes a 'tod' attribute)
  step [n]                advance n events from the loaded event log
  show                    print the current context and clock
  devices                 list registered devices
  act [class] [action]    request a device action for the current context
  y | n                   accept or reject the shown proposal
  quit                    leave (saves the model when --save-model is set)"""


class ReplSession:
    """Line-oriented session: set context, fire requests, grade proposals."""

    def __init__(
        self,
        decider: Decider,
        schema: Schema,
        *,
        events=None,
        stream: ContextStream | None = None,
        append_path: str | None = None,
    ) -> None:
        self.decider = decider
        self.schema = schema
        self.events = list(events or ())
        self.stream = stream
        self.append_path = append_path
        self.values: dict[str, object] = {}
        self.t = self.events[0].t if self.events else datetime.now()
        self.cursor = 0
        self.episode = None
        self.request: Request | None = None
        self.snapshot = None

    def run(self, lines: Iterable[str]) -> int:
        print("type 'help' for commands")
        for raw in lines:
            line = raw.strip()
            if not line:
                continue
            try:
                if not self._dispatch(line):
                    break
            except ValueError as e:
                print(f"error: {e}")
        return 0

    def _dispatch(self, line: str) -> bool:
        toks = line.split()
        cmd = toks[0].lower()
        if cmd in ("quit", "exit"):
            return False
        if cmd == "help":
            print(_REPL_HELP)
        elif cmd == "show":
            self._show()
        elif cmd == "devices":
            for e in self.decider.registry.devices:
                classes = ",".join(sorted(e.declared))
                print(f"{e.id} [{classes}] actions: {', '.join(e.actions)}")
        elif cmd == "time":
            if len(toks) != 2:
                print("usage: time <iso-datetime>")
            else:
                self.t = datetime.fromisoformat(toks[1])
                self._auto_tod()
        elif cmd == "ctx":
            self._set_ctx(toks[1:])
        elif cmd == "step":
            self._step(int(toks[1]) if len(toks) > 1 else 1)
        elif cmd == "act":
            self._act(toks[1:])
        elif cmd in ("y", "n"):
            self._feedback(cmd == "y")
        else:
            print(f"unknown command {cmd!r}; type 'help'")
        return True

    def _show(self) -> None:
        print(f"time: {self.t.isoformat()}")
        for attr in self.schema:
            v = self.values.get(attr.name, "<unset>")
            print(f"  {attr.name} = {v}")

    def _auto_tod(self) -> None:
        for attr in self.schema:
            if attr.kind is Kind.CYCLIC and attr.name == "tod":
                self.values["tod"] = second_of_day(self.t)

    def _set_ctx(self, toks: list[str]) -> None:
        if not toks:
            print("usage: ctx <attr> <value...>")
            return
        attr = next((a for a in self.schema if a.name == toks[0]), None)
        if attr is None:
            names = ", ".join(a.name for a in self.schema)
            print(f"unknown attribute {toks[0]!r}; schema has: {names}")
            return
        raw = toks[1:]
        if attr.kind is Kind.CATEGORICAL:
            if len(raw) != 1:
                print(f"{attr.name} takes one label")
                return
            self.values[attr.name] = raw[0]
        elif attr.kind is Kind.VECTOR:
            if len(raw) != attr.dims:
                print(f"{attr.name} takes {attr.dims} numbers")
                return
            self.values[attr.name] = tuple(float(x) for x in raw)
        else:
            if len(raw) != 1:
                print(f"{attr.name} takes one number")
                return
            self.values[attr.name] = float(raw[0])

    def _step(self, n: int) -> None:
        if not self.events or self.stream is None:
            print("no event log loaded")
            return
        for _ in range(n):
            if self.cursor >= len(self.events):
                print("event log exhausted")
                return
            e = self.events[self.cursor]
            self.cursor += 1
            self.t = e.t
            snap = self.stream.snapshot_at(e.t)
            self.values = {a.name: v for a, v in zip(self.schema, snap.values)}
            print(f"[{e.t.isoformat()}] {e.sensor} {e.value}")

    def _act(self, toks: list[str]) -> None:
        registry = self.decider.registry
        device_class = toks[0] if toks else None
        action = toks[1] if len(toks) > 1 else None
        if device_class is not None and device_class not in registry.class_parents:
            known = ", ".join(sorted(registry.class_parents))
            print(f"unknown class {device_class!r}; known classes: {known}")
            return
        if action is not None:
            all_actions = {a for e in registry.devices for a in e.actions}
            if action not in all_actions:
                print(f"unknown action {action!r}; known actions: {', '.join(sorted(all_actions))}")
                return
        missing = [a.name for a in self.schema if a.name not in self.values]
        if missing:
            print(f"context incomplete; set: {', '.join(missing)}")
            return
        snap = self.schema.snapshot(tuple(self.values[a.name] for a in self.schema), self.t)
        self.request = Request(device_class=device_class, action=action, t=self.t)
        self.snapshot = snap
        self.episode = self.decider.resolve(self.request, snap)
        self._show_proposal()

    def _show_proposal(self) -> None:
        p = self.episode.proposal if self.episode else None
        if p is None or p.utility <= 0.0:
            print("no compatible device")
            self.episode = None
            return
        print(f"proposal: {p.device} {p.action} (utility {p.utility:.3f})  accept? y/n")

    def _feedback(self, positive: bool) -> None:
        if self.episode is None or self.episode.proposal is None:
            print("no open proposal")
            return
        if positive:
            p = self.episode.proposal
            self.decider.accept(self.episode)
            print(f"accepted {p.device} {p.action}")
            if self.append_path:
                rec = TraceRecord(self.snapshot, self.request, p.device, p.action)
                _append_trace(self.append_path, self.schema, rec)
            self.episode = None
            return
        nxt = self.decider.reject(self.episode)
        if nxt is None or nxt.utility <= 0.0:
            print("no remaining proposals")
            self.episode = None
        else:
            self._show_proposal()


def _append_trace(path: str, schema: Schema, rec: TraceRecord) -> None:
    p = Path(path)
    row = json.dumps(trace_row_json(schema, rec), sort_keys=True) + "\n"
    if p.exists():
        with open(p, encoding="utf-8") as f:
            head = json.loads(f.readline())
        if head.get("schema") != schema.to_json():
            raise CliError(f"{path}: existing trace uses a different schema")
        with open(p, "a", encoding="utf-8") as f:
            f.write(row)
    else:
        header = trace_header_json(schema, {"source": "repl"})
        with open(p, "w", encoding="utf-8") as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
            f.write(row)


def cmd_repl(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    stream = None
    events = None
    if args.model:
        decider = Decider.load(args.model)
        schema = decider.schema
    else:
        cfg.require("registry")
        registry = Registry.load(cfg.registry)
        if cfg.sensor_map:
            cfg.require("sensor_map")
            smap = SensorMap.load(cfg.sensor_map)
            schema = build_experiment_schema(
                smap, cfg.location_mode, user=args.user, include_previous=args.include_previous
            )
        elif cfg.schema:
            cfg.require("schema")
            with open(cfg.schema, encoding="utf-8") as f:
                schema = Schema.from_json(json.load(f))
        else:
            raise CliError("repl needs --model, --schema, or --sensor-map")
        decider = Decider(registry, schema, hp=cfg.hp())
    if args.events:
        cfg.require("sensor_map")
        smap = SensorMap.load(cfg.sensor_map)
        with open(args.events, encoding="utf-8") as f:
            events = parse_event_log(f).events
        stream = ContextStream(
            events, smap, cfg.location_mode, user=args.user, include_previous=args.include_previous
        )
        if stream.schema.to_json() != schema.to_json():
            raise CliError("event log schema does not match the model's schema")
    session = ReplSession(
        decider, schema, events=events, stream=stream, append_path=args.append_trace
    )
    rc = session.run(sys.stdin)
    if args.save_model:
        with _atomic(Path(args.save_model)) as tmp:
            decider.dump(tmp)
        print(f"model saved to {args.save_model}")
    return rc


# ── inspect ──────────────────────────────────────────────────────────────


def _render_bound(attr, b) -> str:
    if attr.kind is Kind.CATEGORICAL:
        return "{" + "|".join(sorted(b)) + "}"
    if attr.kind is Kind.VECTOR:
        return "x".join(f"[{lo:.4g},{hi:.4g}]" for lo, hi in b)
    return f"[{b[0]:.4g},{b[1]:.4g}]"


def cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.model)
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise CliError(
            f"{path}: parse error at offset {e.pos} (line {e.lineno}, column {e.colno})"
        ) from e
    decider = Decider.from_json(raw)
    if args.json:
        print(json.dumps(decider.to_json(), sort_keys=True, indent=2))
        return 0
    schema = decider.schema
    print(f"schema: {', '.join(a.name for a in schema)}")
    print(f"devices: {len(decider.models)}")
    for device in sorted(decider.models):
        model = decider.models[device]
        print(f"\n{device}: {len(model.states)} state(s)")
        for i, st in enumerate(model.states):
            print(
                f"  state {i}: radius={st.radius:.4g} cache={len(st.cache)} "
                f"entropy={state_entropy(st.cache):.3f} fresh={'yes' if st.fresh_init else 'no'}"
            )
            bounds = " ".join(
                f"{a.name}={_render_bound(a, b)}" for a, b in zip(schema, st.bounds)
            )
            print(f"    bounds: {bounds}")
            utilities = " ".join(f"{a}={u:.3f}" for a, u in sorted(st.utilities.items()))
            print(f"    utilities: {utilities}")
    return 0


# ── wiring ───────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ctxact",
        description="Context-aware device selection: ingest logs, replay traces, inspect models.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: config value or '.')")
    common.add_argument("--seed", type=int, help="seed echoed into the summary")
    common.add_argument("--registry", help="registry JSON path")
    common.add_argument("--sensor-map", dest="sensor_map", help="sensor map JSON path")
    common.add_argument(
        "--specificity",
        choices=("none", "action", "class+action"),
        help="how much of each request is spelled out",
    )
    common.add_argument(
        "--location-mode",
        dest="location_mode",
        choices=("categorical", "coordinate"),
        help="location attribute flavor",
    )

    hp = argparse.ArgumentParser(add_help=False)
    hp.add_argument("--radius", type=float, help="state creation radius (normalized)")
    hp.add_argument("--knn-k", dest="knn_k", type=int)
    hp.add_argument("--reward", type=float)
    hp.add_argument("--entropy-threshold", dest="entropy_threshold", type=float)
    hp.add_argument("--required-gain", dest="required_gain", type=float)
    hp.add_argument("--split-points", dest="split_points", type=int)
    hp.add_argument("--cache-capacity", dest="cache_capacity", type=int)
    hp.add_argument("--recovery-window", dest="recovery_window", type=int)
    hp.add_argument("--implicit-weight", dest="implicit_weight", type=float)
    hp.add_argument(
        "--radius-override",
        dest="radius_override",
        action="append",
        metavar="NAME=VALUE",
        help="raw-unit radius for one attribute (repeatable)",
    )

    p = sub.add_parser("ingest", parents=[common], help="event log -> canonical events + request trace")
    p.add_argument("events", help="whitespace-separated event log")
    p.add_argument("--config", help="run config JSON; flags override")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed line")
    p.add_argument("--user", default="resident")
    p.add_argument("--include-previous", dest="include_previous", action="store_true")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("replay", parents=[common, hp], help="trace -> report.csv + summary.json")
    p.add_argument("trace", help="request trace JSONL")
    p.add_argument(
        "--config",
        action="append",
        help="run config JSON; repeat to sweep several configs",
    )
    p.add_argument("--swap", nargs=2, metavar=("A", "B"), help="exchange two device ids")
    p.add_argument("--at", type=int, help="record index where the swap starts")
    p.add_argument("--baseline", choices=("nearest",), help="replace the learner")
    p.add_argument("--max-proposals", dest="max_proposals", type=int)
    p.add_argument("--window", type=int, help="sliding accuracy window")
    p.add_argument("--limit", type=int, help="replay only the first N records")
    p.add_argument("--save-model", dest="save_model", help="dump the trained model JSON here")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers across configs")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("repl", parents=[common, hp], help="interactive request/feedback session")
    p.add_argument("--config", help="run config JSON; flags override")
    p.add_argument("--model", help="resume from a saved model JSON")
    p.add_argument("--schema", help="schema JSON path (manual-context mode)")
    p.add_argument("--events", help="event log to advance context from")
    p.add_argument("--append-trace", dest="append_trace", help="append accepted requests here")
    p.add_argument("--save-model", dest="save_model", help="dump the model JSON on exit")
    p.add_argument("--user", default="resident")
    p.add_argument("--include-previous", dest="include_previous", action="store_true")
    p.set_defaults(fn=cmd_repl)

    p = sub.add_parser("inspect", help="print a saved model's states and utilities")
    p.add_argument("model", help="model JSON written by replay/repl --save-model")
    p.add_argument("--json", action="store_true", help="emit the persistence JSON instead")
    p.set_defaults(fn=cmd_inspect)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); suppress the shutdown noise
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
