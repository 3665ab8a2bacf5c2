#!/usr/bin/env python3
"""Generate a synthetic household request trace and write it as JSONL.

The emitted file embeds the schema and device registry in its header, so
downstream consumers (replay, the ML baselines) need nothing else.
"""

import argparse
from pathlib import Path

from ctxact.ingest import default_scenario, generate_synthetic_scenario, write_trace


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--days", type=int, default=56)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--mode", choices=("coordinate", "categorical"), default="coordinate")
    ap.add_argument(
        "--specificity", choices=("none", "action", "class+action"), default="action"
    )
    ap.add_argument("--out", default="traces/synth.jsonl")
    args = ap.parse_args()

    trace = generate_synthetic_scenario(
        default_scenario(days=args.days),
        seed=args.seed,
        mode=args.mode,
        specificity=args.specificity,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(out, trace.schema, trace.records, meta=trace.meta, registry=trace.registry)
    print(f"{len(trace.records)} records over {args.days} days -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
