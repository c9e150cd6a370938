#!/usr/bin/env python3
"""Sweep inverse temperature and size: covariance decay slack, the l1 bound,
and the beta^{d+1} scaling of the interaction threshold.

Usage: python scripts/decay_sweep.py [--out sweep.csv]
"""

import argparse
import csv
import sys

from fermidecay.bounds import covariance_l1_D
from fermidecay.covariance import (
    CovarianceSpec,
    decay_envelope_check,
    l1_bound_check,
)
from fermidecay.lattice import LatticeSpec, TimeGrid
from fermidecay.model import ModelParams, hubbard_threshold


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=None)
    ap.add_argument("--L", type=int, default=12)
    args = ap.parse_args()
    rows = []
    for beta in (1.0, 2.0, 4.0, 8.0):
        p = ModelParams(t=1.0, t_prime=0.0, mu=0.0, beta=beta)
        spec = LatticeSpec(d=1, L=args.L)
        cs = CovarianceSpec(spec, p)
        grid = TimeGrid(beta, 4)
        env = decay_envelope_check(cs, grid)
        l1 = l1_bound_check(cs, grid)
        rows.append({
            "beta": beta,
            "worst_envelope_ratio": env["worst_ratio_chord"],
            "l1_sum": l1["lhs"],
            "l1_bound": l1["rhs"],
            "D": covariance_l1_D(cs, grid),
            "hubbard_threshold": hubbard_threshold(p, 1),
            "threshold_times_beta2": hubbard_threshold(p, 1) * beta**2,
        })
    fields = list(rows[0])
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(target, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            target.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
