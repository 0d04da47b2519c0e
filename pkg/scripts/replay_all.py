"""Replay every pipeline and print a compact table plus the steps that failed."""

from __future__ import annotations

import argparse

from aut120.groups import FactTable
from aut120.replay import FAILED, Context, load_pipelines, run_all


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--facts", help="alternative fact table")
    args = ap.parse_args()
    facts = FactTable.load(args.facts) if args.facts else FactTable.default()
    reports = run_all(Context(load_pipelines(), facts=facts))
    width = max(len(r.pipeline) for r in reports)
    for r in reports:
        counts = {}
        for s in r.steps:
            counts[s.status] = counts.get(s.status, 0) + 1
        tally = ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
        print(f"{r.pipeline:<{width}}  {r.verdict:<6}  {r.timing:6.2f}s  {tally}")
    failed = [(r.pipeline, i, s) for r in reports for i, s in enumerate(r.steps, 1) if s.status == FAILED]
    if failed:
        print("\nfailed steps:")
        for pid, i, s in failed:
            print(f"  {pid} #{i}: {s.description}")
            for key in ("refutation", "orders", "groups", "max", "error"):
                if key in s.payload:
                    print(f"      {key}: {s.payload[key]}")


if __name__ == "__main__":
    main()
