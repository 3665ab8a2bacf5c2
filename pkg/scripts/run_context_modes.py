#!/usr/bin/env python3
"""Request- and context-specificity comparisons on matched traces.

Four runs from the same random draws: requests bare vs action-specified,
and location as room label vs coordinates. Prints a small table.
"""

import argparse
from pathlib import Path

from ctxact.cli import RunConfig
from ctxact.decider import Decider
from ctxact.harness import build_report, replay
from ctxact.ingest import Trace, default_scenario, generate_synthetic_scenario

ROOT = Path(__file__).resolve().parent.parent


def run(cfg: RunConfig, days: int, mode: str, specificity: str, limit: int | None):
    trace = generate_synthetic_scenario(
        default_scenario(days=days), seed=cfg.seed, mode=mode, specificity=specificity
    )
    if limit is not None:
        trace = Trace(trace.schema, trace.records[:limit], trace.meta, trace.registry)
    decider = Decider(trace.registry, trace.schema, hp=cfg.hp())
    return replay(trace, decider)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "acceptance.json"))
    ap.add_argument("--days", type=int, default=56)
    ap.add_argument("--negatives-over", type=int, default=200)
    args = ap.parse_args()

    cfg = RunConfig.from_file(args.config)

    print("request specificity (coordinate locations, full trace):")
    for spec in ("none", "action"):
        eps = run(cfg, args.days, "coordinate", spec, None)
        rep = build_report(eps)
        label = "bare 'act'" if spec == "none" else "action given"
        print(f"  {label:<13} fda={rep.fda:.4f} afr={rep.afr:.3f} within_two={rep.within_two:.4f}")

    n = args.negatives_over
    print(f"\nlocation flavor (action requests, negatives over first {n} requests):")
    for mode in ("categorical", "coordinate"):
        eps = run(cfg, args.days, mode, "action", n)
        negatives = sum(e.negatives for e in eps)
        print(f"  {mode:<13} negatives={negatives}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
