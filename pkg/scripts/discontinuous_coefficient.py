"""Preconditioned versus plain GMRES for a piecewise-constant coefficient in 3D.

The coefficient jumps from 2 to 2.5 across ``x = 0.5``; the source vanishes
and no closed-form solution exists, so only iterations and RES are reported.

    python3 scripts/discontinuous_coefficient.py --grid 15x15x15 --nsteps 4,8,16
"""

import argparse

from pintfrac.cli import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--alpha", default="0.5")
    ap.add_argument("--grid", default="15x15x15")
    ap.add_argument("--nsteps", default="4,8,16", help="values of N")
    ap.add_argument("--skip-plain", action="store_true", help="do not run unpreconditioned GMRES")
    ap.add_argument("--out")
    args = ap.parse_args()

    methods = ["GMRES-2S", "NCG-2S"] + ([] if args.skip_plain else ["GMRES-I"])
    cfg = ExperimentConfig(
        example="ex3",
        alphas=[float(a) for a in args.alpha.split(",")],
        grids=[tuple(int(k) for k in g.split("x")) for g in args.grid.split(",")],
        nsteps=[int(n) for n in args.nsteps.split(",")],
        n_convention="N",
        methods=methods,
        max_iter=5000,
        out=args.out,
    )
    code, _ = run_sweep(cfg)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
