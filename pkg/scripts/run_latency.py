#!/usr/bin/env python3
"""Decision latency as the schema widens.

Pads the synthetic trace's schema with random numeric attributes and times
resolve/feedback over the first N requests at each width.
"""

import argparse
import json
from pathlib import Path

from ctxact.cli import RunConfig
from ctxact.harness import measure_latency
from ctxact.ingest import default_scenario, generate_synthetic_scenario

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "acceptance.json"))
    ap.add_argument("--days", type=int, default=56)
    ap.add_argument("--limit", type=int, default=1000)
    ap.add_argument("--attrs", type=int, nargs="+", default=[3, 13, 23, 33])
    ap.add_argument("--out", default=str(ROOT / "results" / "latency.json"))
    args = ap.parse_args()

    cfg = RunConfig.from_file(args.config)
    trace = generate_synthetic_scenario(
        default_scenario(days=args.days),
        seed=cfg.seed,
        mode=cfg.location_mode,
        specificity=cfg.specificity,
    )
    rows = []
    print(f"{'attrs':>5} {'mean ms':>9} {'p95 ms':>9} {'feedback ms':>12}")
    for total in args.attrs:
        summary = measure_latency(trace, total, hp=cfg.hp(), seed=cfg.seed, limit=args.limit)
        rows.append(summary.to_json())
        print(
            f"{total:>5} {summary.mean_decision_us / 1000:>9.3f} "
            f"{summary.p95_decision_us / 1000:>9.3f} {summary.mean_feedback_us / 1000:>12.3f}"
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    print(f"table -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
