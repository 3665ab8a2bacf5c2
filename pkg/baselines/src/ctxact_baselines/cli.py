"""Command line entry: score one trace with one batch learner.

    ctxact-baselines TRACE --learner rf --retrain-every 100 --seed 7 --out DIR

Writes DIR/report.csv and DIR/summary.json in the shared report layout
and prints a one line result.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .learners import LEARNERS
from .replay import replay_with_retraining, write_outputs
from .traces import TraceError, read_trace


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ctxact-baselines",
        description="Replay a decision trace through a periodically retrained batch learner.",
    )
    p.add_argument("trace", help="trace file (JSON lines with a schema header)")
    p.add_argument("--learner", required=True, choices=LEARNERS, help="which learner to score")
    p.add_argument("--retrain-every", type=int, default=100, metavar="N",
                   help="refit after every N requests (default 100)")
    p.add_argument("--seed", type=int, default=7, help="random seed for the learner")
    p.add_argument("--out", default="baseline-out", metavar="DIR",
                   help="output directory for report.csv and summary.json")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        trace = read_trace(args.trace)
        run = replay_with_retraining(
            trace, args.learner, retrain_every=args.retrain_every, seed=args.seed
        )
        out = write_outputs(run, args.out, trace_name=Path(args.trace).name)
    except (TraceError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(
        f"{args.learner}: {len(run.episodes)} records"
        f" fda={run.fda:.4f} refits={len(run.refits)} -> {out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
