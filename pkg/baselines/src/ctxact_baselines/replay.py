"""Replay a trace through a periodically retrained batch learner.

The learner answers every request with exactly one guess; there is no
re-proposal loop, so a wrong guess is simply an unsatisfied request. A
fresh model is fitted whenever ``retrain_every`` more requests have
arrived, always on every example seen so far. Until the first refit the
running majority label stands in for a model.

Reports use the same CSV and summary-JSON layout the engine writes, so
one set of tooling can score both.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter
from typing import Sequence

from .features import encode_matrix, label_for
from .learners import LEARNERS, fit_best, majority_label
from .traces import TraceFile

CSV_COLUMNS = ("index", "timestamp", "first_correct", "negatives", "proposals", "latency_us")

SUMMARY_WINDOW = 30


@dataclass(frozen=True)
class PredictionRecord:
    """One scored request: single guess against the ground truth."""

    index: int
    timestamp: str
    predicted: str
    truth: str
    latency_us: float

    @property
    def first_correct(self) -> bool:
        return self.predicted == self.truth

    @property
    def negatives(self) -> int:
        return 0 if self.first_correct else 1


@dataclass
class RetrainingRun:
    learner: str
    retrain_every: int
    seed: int
    episodes: list[PredictionRecord] = field(default_factory=list)
    refits: list[dict] = field(default_factory=list)

    @property
    def fda(self) -> float:
        n = len(self.episodes)
        return sum(e.first_correct for e in self.episodes) / n if n else 0.0


def replay_with_retraining(
    trace: TraceFile,
    learner: str,
    retrain_every: int = 100,
    seed: int = 7,
) -> RetrainingRun:
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner {learner!r}; expected one of {LEARNERS}")
    if retrain_every < 1:
        raise ValueError("retrain_every must be at least 1")
    if not trace.records:
        raise ValueError("trace has no records to replay")
    X = encode_matrix(trace)
    labels = [label_for(r) for r in trace.records]
    run = RetrainingRun(learner=learner, retrain_every=retrain_every, seed=seed)
    model = None
    for i, rec in enumerate(trace.records):
        if i and i % retrain_every == 0:
            model, params = fit_best(learner, X[:i], labels[:i], seed)
            run.refits.append({"at": i, "examples": i, "params": params})
        t0 = perf_counter()
        if model is None:
            guess = majority_label(labels[:i]) or ""
        else:
            guess = str(model.predict(X[i : i + 1])[0])
        latency_us = (perf_counter() - t0) * 1e6
        run.episodes.append(
            PredictionRecord(
                index=i,
                timestamp=rec.timestamp,
                predicted=guess,
                truth=labels[i],
                latency_us=latency_us,
            )
        )
    return run


# ── shared report formats ────────────────────────────────────────────────


def write_report_csv(path: str | Path, episodes: Sequence[PredictionRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for e in episodes:
            w.writerow(
                [e.index, e.timestamp, int(e.first_correct), e.negatives, 1, f"{e.latency_us:.3f}"]
            )


def summary_json(run: RetrainingRun, *, trace_name: str | None = None) -> str:
    """Canonical summary bytes, scalar-for-scalar the engine's layout.

    Latency is excluded (wall clock varies between reruns); with one
    guess per request the within-two rate collapses onto the fda and
    the average false rate is its complement.
    """
    n = len(run.episodes)
    wrong = sum(not e.first_correct for e in run.episodes)
    doc = {
        "fda": run.fda,
        "afr": wrong / n if n else 0.0,
        "within_two": run.fda,
        "window": SUMMARY_WINDOW,
        "records": n,
        "unsatisfied": wrong,
        "seed": run.seed,
        "config": {
            "learner": run.learner,
            "retrain_every": run.retrain_every,
            "trace": trace_name,
        },
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_outputs(run: RetrainingRun, out_dir: str | Path, *, trace_name: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(out / "report.csv", run.episodes)
    (out / "summary.json").write_text(summary_json(run, trace_name=trace_name), encoding="utf-8")
    return out
