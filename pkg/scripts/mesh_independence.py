"""Iteration counts of the two-sided preconditioned solvers as the time grid is refined.

Variable coefficient ``a = 40 + x^3.5 + y^3.5`` on the unit square.  The
default grid is desk scale; pass ``--grid 63x63,127x127`` for larger runs.

    python3 scripts/mesh_independence.py --out mesh.csv
"""

import argparse

from pintfrac.cli import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--alpha", default="0.1,0.5,0.9")
    ap.add_argument("--grid", default="31x31")
    ap.add_argument("--nsteps", default="16,32,64,128", help="values of N+1")
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        example="ex2",
        alphas=[float(a) for a in args.alpha.split(",")],
        grids=[tuple(int(k) for k in g.split("x")) for g in args.grid.split(",")],
        nsteps=[int(n) for n in args.nsteps.split(",")],
        n_convention="N_plus_1",
        methods=["GMRES-2S", "NCG-2S"],
        out=args.out,
    )
    code, rows = run_sweep(cfg)
    for alpha in cfg.alphas:
        counts = {r["method"]: set() for r in rows}
        for r in rows:
            if r["alpha"] == alpha:
                counts[r["method"]].add(r["Iter"])
        print(f"alpha={alpha}: " + ", ".join(f"{m} iterations {sorted(c)}" for m, c in counts.items()))
    raise SystemExit(code)


if __name__ == "__main__":
    main()
