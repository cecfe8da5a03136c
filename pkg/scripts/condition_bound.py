"""Dense condition numbers of the preconditioned matrix against the contrast ``a_max / a_min``.

Random smooth coefficients with certified bounds are drawn on small grids;
each row prints ``kappa_2``, the bound and the extreme singular values.

    python3 scripts/condition_bound.py --instances 200 --seed 3
"""

import argparse
import csv
import math
import sys

import numpy as np

from pintfrac.dense_oracle import dense_assemble_all
from pintfrac.verification import random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-m", type=int, default=6)
    ap.add_argument("--max-N", type=int, default=8)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["m", "N", "contrast", "kappa2", "s_min", "s_max", "within_bound"])
    violations = 0
    for _ in range(args.instances):
        grid, a, T = random_instance(rng, max_m=args.max_m, max_N=args.max_N)
        s = np.linalg.svd(dense_assemble_all(grid, a, T).preconditioned(), compute_uv=False)
        bound = a.a_max / a.a_min
        ok = s[0] / s[-1] <= bound + 1e-8 and s[-1] >= math.sqrt(1 / bound) - 1e-8 and s[0] <= math.sqrt(bound) + 1e-8
        violations += not ok
        out.writerow(["x".join(map(str, grid.m)), grid.N, f"{bound:.6f}", f"{s[0] / s[-1]:.8f}",
                      f"{s[-1]:.8f}", f"{s[0]:.8f}", ok])
    print(f"# {violations} of {args.instances} instances violate the bound", file=sys.stderr)
    raise SystemExit(1 if violations else 0)


if __name__ == "__main__":
    main()
