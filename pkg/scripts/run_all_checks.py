#!/usr/bin/env python3
"""Run the full verification battery and drop reports under results/.

Usage: python scripts/run_all_checks.py [--seed N] [--out-dir results]
"""

import argparse
import pathlib
import sys

from fermidecay.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--model", default=None)
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(exist_ok=True)
    rc_total = 0
    for suite in ("covariance", "detbound", "grassmann", "taylor", "theorem", "all"):
        argv = ["verify", "--suite", suite, "--seed", str(args.seed),
                "--out", str(out / f"verify_{suite}.json")]
        if args.model:
            argv += ["--model", args.model]
        rc = cli_main(argv)
        print(f"suite {suite}: exit {rc}")
        rc_total |= rc
    for kind, extra in (("covariance_decay", ["--L", "16", "--beta", "2",
                                              "--mu", "0", "--half-steps", "4"]),
                        ("envelope", []), ("taylor", [])):
        argv = ["table", "--kind", kind, "--out", str(out / f"table_{kind}.csv")]
        rc = cli_main(argv + extra)
        print(f"table {kind}: exit {rc}")
        rc_total |= rc
    return rc_total


if __name__ == "__main__":
    sys.exit(main())
