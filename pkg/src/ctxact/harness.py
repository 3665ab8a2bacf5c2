"""Trace replay with a simulated user, accuracy metrics, and report files.

The simulated user stands in for the person who made each request: a
proposal is accepted when it names the ground-truth device, and, for
requests that left the action unspecified, the ground-truth action too.
Anything else is rejected, which feeds the learner a negative and asks
for the next proposal.

Latency numbers are wall-clock and vary run to run, so they are kept out
of the deterministic summary (two replays of the same trace, config, and
seed must serialize to identical summary bytes).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from random import Random
from time import perf_counter
from typing import Iterable, Mapping, Sequence

from .context import Schema, Snapshot, numeric
from .decider import Decider
from .ingest import Trace, TraceRecord
from .model import Hyperparameters, Proposal, Request

CSV_COLUMNS = ("index", "timestamp", "first_correct", "negatives", "proposals", "latency_us")


class MetricsError(ValueError):
    """Metric asked of an empty or malformed record set."""


class ReplayError(ValueError):
    """Replay configuration does not fit the trace."""


# ── replay ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EpisodeRecord:
    """Outcome of one trace request.

    ``negatives`` equals proposals issued minus one when satisfied, and
    the full proposal count when not.
    """

    index: int
    t: datetime
    proposals: tuple[tuple[str, str], ...]
    negatives: int
    satisfied: bool
    first_correct: bool
    within_two: bool
    decision_us: float
    feedback_us: float


def _accepts(rec: TraceRecord, proposal: Proposal) -> bool:
    if proposal.device != rec.device:
        return False
    if rec.request.action is None and proposal.action != rec.action:
        return False
    return True


def replay(trace: Trace, decider, max_proposals: int | None = None) -> list[EpisodeRecord]:
    """Feed every trace record through the decider and score the outcomes.

    ``decider`` is anything with the resolve/reject/accept episode
    protocol. ``max_proposals`` caps how many proposals the simulated user
    will look at per request (default: no cap, i.e. until exhaustion);
    exhaustion and cap both count as unsatisfied.
    """
    if max_proposals is not None and max_proposals < 1:
        raise ReplayError("max_proposals must be at least 1")
    registry = getattr(decider, "registry", None)
    if registry is not None:
        known = {e.id for e in registry.devices}
        strange = {r.device for r in trace.records} - known
        if strange:
            raise ReplayError(f"trace devices missing from registry: {sorted(strange)}")
    out = []
    for i, rec in enumerate(trace.records):
        t0 = perf_counter()
        ep = decider.resolve(rec.request, rec.snapshot)
        decision_us = (perf_counter() - t0) * 1e6
        issued: list[tuple[str, str]] = []
        feedback_us = 0.0
        satisfied = False
        while ep.proposal is not None:
            prop = ep.proposal
            issued.append((prop.device, prop.action))
            t1 = perf_counter()
            if _accepts(rec, prop):
                decider.accept(ep)
                feedback_us += (perf_counter() - t1) * 1e6
                satisfied = True
                break
            nxt = decider.reject(ep)
            feedback_us += (perf_counter() - t1) * 1e6
            if max_proposals is not None and len(issued) >= max_proposals:
                break
            if nxt is None:
                break
        negatives = len(issued) - 1 if satisfied else len(issued)
        out.append(
            EpisodeRecord(
                index=i,
                t=rec.t,
                proposals=tuple(issued),
                negatives=negatives,
                satisfied=satisfied,
                first_correct=satisfied and negatives == 0,
                within_two=satisfied and len(issued) <= 2,
                decision_us=decision_us,
                feedback_us=feedback_us,
            )
        )
    return out


# ── metrics ──────────────────────────────────────────────────────────────


def compute_fda(records: Sequence) -> float:
    """Fraction of requests satisfied by the very first proposal."""
    if not records:
        raise MetricsError("no records")
    return sum(r.first_correct for r in records) / len(records)


def compute_afr(records: Sequence) -> float:
    """Mean negative-feedback count per request."""
    if not records:
        raise MetricsError("no records")
    return sum(r.negatives for r in records) / len(records)


def within_two_rate(records: Sequence) -> float:
    if not records:
        raise MetricsError("no records")
    return sum(r.within_two for r in records) / len(records)


def sliding_fda(records: Sequence, window: int = 30) -> list[float]:
    """Moving first-decision accuracy; early indices use the prefix."""
    if window < 1:
        raise MetricsError("window must be at least 1")
    out = []
    running = 0
    flags = [1 if r.first_correct else 0 for r in records]
    for i, f in enumerate(flags):
        running += f
        if i >= window:
            running -= flags[i - window]
        out.append(running / min(i + 1, window))
    return out


def _percentile(ordered: Sequence[float], q: float) -> float:
    if not ordered:
        return 0.0
    k = max(0, min(len(ordered) - 1, math.ceil(q * len(ordered)) - 1))
    return ordered[k]


@dataclass
class MetricsReport:
    fda: float
    afr: float
    within_two: float
    window: int
    sliding: list[float]
    records: int
    unsatisfied: int
    mean_decision_us: float
    p50_decision_us: float
    p95_decision_us: float
    p99_decision_us: float
    mean_feedback_us: float

    def scalar_json(self) -> dict:
        """The deterministic part: identical across reruns of one config."""
        return {
            "fda": self.fda,
            "afr": self.afr,
            "within_two": self.within_two,
            "window": self.window,
            "records": self.records,
            "unsatisfied": self.unsatisfied,
        }

    def latency_json(self) -> dict:
        return {
            "mean_decision_us": self.mean_decision_us,
            "p50_decision_us": self.p50_decision_us,
            "p95_decision_us": self.p95_decision_us,
            "p99_decision_us": self.p99_decision_us,
            "mean_feedback_us": self.mean_feedback_us,
        }


def build_report(records: Sequence[EpisodeRecord], window: int = 30) -> MetricsReport:
    decisions = sorted(r.decision_us for r in records)
    n = len(records)
    return MetricsReport(
        fda=compute_fda(records),
        afr=compute_afr(records),
        within_two=within_two_rate(records),
        window=window,
        sliding=sliding_fda(records, window),
        records=n,
        unsatisfied=sum(not r.satisfied for r in records),
        mean_decision_us=math.fsum(decisions) / n,
        p50_decision_us=_percentile(decisions, 0.50),
        p95_decision_us=_percentile(decisions, 0.95),
        p99_decision_us=_percentile(decisions, 0.99),
        mean_feedback_us=math.fsum(r.feedback_us for r in records) / n,
    )


def summary_json(report: MetricsReport, *, config: Mapping | None = None, seed: int | None = None) -> str:
    """Canonical summary bytes; wall-clock numbers deliberately excluded."""
    doc = report.scalar_json()
    doc["seed"] = seed
    doc["config"] = dict(config) if config is not None else None
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ── report files ─────────────────────────────────────────────────────────


def write_csv(path: str | Path, records: Iterable[EpisodeRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(
                [
                    r.index,
                    r.t.isoformat(timespec="microseconds"),
                    int(r.first_correct),
                    r.negatives,
                    len(r.proposals),
                    f"{r.decision_us:.3f}",
                ]
            )


@dataclass(frozen=True)
class CsvRow:
    """One report row; enough to recompute every accuracy metric exactly."""

    index: int
    timestamp: str
    first_correct: bool
    negatives: int
    proposals: int
    latency_us: float

    @property
    def satisfied(self) -> bool:
        return self.proposals > 0 and self.negatives == self.proposals - 1

    @property
    def within_two(self) -> bool:
        return self.satisfied and self.proposals <= 2


def read_csv_rows(path: str | Path) -> list[CsvRow]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise MetricsError(f"unexpected CSV header {header}")
        return [
            CsvRow(int(row[0]), row[1], bool(int(row[2])), int(row[3]), int(row[4]), float(row[5]))
            for row in reader
        ]


# ── latency protocol ─────────────────────────────────────────────────────


def pad_trace(trace: Trace, total_attrs: int, seed: int = 0) -> Trace:
    """Stretch the schema with random numeric attributes up to a total.

    The added values are uniform in [0,1] per record, drawn from one
    seeded stream, so the padded trace is itself deterministic.
    """
    base = len(trace.schema)
    if total_attrs < base:
        raise ReplayError(f"cannot pad {base} attributes down to {total_attrs}")
    extra = total_attrs - base
    if extra == 0:
        return trace
    attrs = list(trace.schema) + [
        numeric(f"pad{i:02d}", 0.0, 1.0) for i in range(extra)
    ]
    schema = Schema(tuple(attrs))
    rng = Random(seed)
    records = []
    for r in trace.records:
        values = tuple(r.snapshot.values) + tuple(rng.random() for _ in range(extra))
        records.append(
            TraceRecord(
                snapshot=schema.snapshot(values, r.t),
                request=r.request,
                device=r.device,
                action=r.action,
            )
        )
    return Trace(schema, records, dict(trace.meta, padded_to=total_attrs), trace.registry)


@dataclass(frozen=True)
class LatencySummary:
    records: int
    attrs: int
    mean_decision_us: float
    p95_decision_us: float
    mean_feedback_us: float

    def to_json(self) -> dict:
        return {
            "records": self.records,
            "attrs": self.attrs,
            "mean_decision_us": self.mean_decision_us,
            "p95_decision_us": self.p95_decision_us,
            "mean_feedback_us": self.mean_feedback_us,
        }


def measure_latency(
    trace: Trace,
    total_attrs: int,
    *,
    hp: Hyperparameters | None = None,
    seed: int = 0,
    limit: int | None = 1000,
) -> LatencySummary:
    """Time resolve and feedback on a schema padded to ``total_attrs``.

    This is a pure timing protocol: every request gets one proposal which
    is then accepted, so the learner keeps updating at a steady rate while
    the clock runs. Accuracy is not scored here.
    """
    if trace.registry is None:
        raise ReplayError("latency protocol needs a registry embedded in the trace")
    padded = pad_trace(trace, total_attrs, seed)
    if limit is not None:
        padded = Trace(padded.schema, padded.records[:limit], padded.meta, padded.registry)
    decider = Decider(padded.registry, padded.schema, hp=hp)
    decisions = []
    feedbacks = []
    for rec in padded.records:
        t0 = perf_counter()
        ep = decider.resolve(rec.request, rec.snapshot)
        decisions.append((perf_counter() - t0) * 1e6)
        if ep.proposal is not None:
            t1 = perf_counter()
            decider.accept(ep)
            feedbacks.append((perf_counter() - t1) * 1e6)
    decisions.sort()
    n = len(padded.records)
    return LatencySummary(
        records=n,
        attrs=total_attrs,
        mean_decision_us=math.fsum(decisions) / n if n else 0.0,
        p95_decision_us=_percentile(decisions, 0.95),
        mean_feedback_us=math.fsum(feedbacks) / len(feedbacks) if feedbacks else 0.0,
    )


# ── nearest-device baseline ──────────────────────────────────────────────


@dataclass
class _BaselineEpisode:
    queue: list[Proposal]
    cursor: int = 0

    @property
    def proposal(self) -> Proposal | None:
        return self.queue[self.cursor] if self.cursor < len(self.queue) else None


class NearestDeviceBaseline:
    """Always proposes the compatible device closest to the user.

    A non-learning comparator: feedback is ignored, rejection just moves
    to the next-closest device. Location comes from the snapshot's
    coordinate attribute, or through a label-position table when the
    trace carries categorical locations.
    """

    def __init__(
        self,
        registry,
        device_positions: Mapping[str, tuple[float, float]],
        *,
        location_index: int = 1,
        label_positions: Mapping[str, tuple[float, float]] | None = None,
    ) -> None:
        self.registry = registry
        missing = [e.id for e in registry.devices if e.id not in device_positions]
        if missing:
            raise ReplayError(f"no position for devices: {missing}")
        self.positions = {k: tuple(v) for k, v in device_positions.items()}
        self.location_index = location_index
        self.label_positions = dict(label_positions or {})

    def _locate(self, snapshot: Snapshot) -> tuple[float, float] | None:
        value = snapshot.values[self.location_index]
        if isinstance(value, str):
            return self.label_positions.get(value)
        return value

    def resolve(self, request: Request, snapshot: Snapshot) -> _BaselineEpisode:
        loc = self._locate(snapshot)
        ranked = []
        for e in self.registry.devices:
            if request.device_class is not None and request.device_class not in e.classes:
                continue
            actions = (request.action,) if request.action is not None else e.actions
            if request.action is not None and request.action not in e.actions:
                continue
            d = math.dist(loc, self.positions[e.id]) if loc is not None else math.inf
            for a in actions:
                ranked.append((d, e.id, a))
        ranked.sort()
        queue = [Proposal(dev, act, 1.0 / (1.0 + d) if d != math.inf else 0.0) for d, dev, act in ranked]
        return _BaselineEpisode(queue)

    def reject(self, ep: _BaselineEpisode) -> Proposal | None:
        ep.cursor += 1
        return ep.proposal

    def accept(self, ep: _BaselineEpisode) -> None:
        pass
