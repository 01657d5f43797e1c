#!/usr/bin/env python3
"""Produce the feasible-set surface CSV for plotting.

Sweeps the tax rate against the employment rate at fixed market size and
reserve ratio, and prints a small summary of where positive hyperparameters
live relative to the line tau = 1 - omega + delta*omega.
"""

import argparse
import csv
import io
import sys

from dichotomy import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=float, default=10000.0)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--resolution", type=int, default=81)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    code = cli.main(
        [
            "sweep",
            "--n", str(args.n),
            "--delta", str(args.delta),
            "--omega-range", "0.05:0.95",
            "--tau-range", "0.0:1.0",
            "--resolution", str(args.resolution),
            "--out", args.out,
        ]
    )
    if code != 0:
        return code

    with open(args.out, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    valid = sum(r["valid"] == "true" for r in rows)
    singular = sum(r["singular"] == "true" for r in rows)
    misplaced = sum(
        1
        for r in rows
        if r["singular"] == "false"
        and (r["valid"] == "true") != (float(r["d"]) > 0 and float(r["theta"]) > 0)
    )
    print(f"wrote {args.out}: {len(rows)} cells, {valid} valid, {singular} singular")
    print(f"valid cells disagreeing with the positive-side rule: {misplaced}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
