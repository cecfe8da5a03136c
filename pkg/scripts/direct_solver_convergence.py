"""Fast direct all-at-once solver for the constant-coefficient problem under mesh refinement.

Reports the max-norm error against the exact solution ``sin x sin y t^2 + x(pi-x) y(pi-y)``
on ``(0, pi)^2`` and the relative residual of the all-at-once system.

    python3 scripts/direct_solver_convergence.py --grid 31x31,63x63,127x127 --nsteps 32
"""

import argparse

from pintfrac.cli import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--alpha", default="0.5")
    ap.add_argument("--grid", default="31x31,63x63")
    ap.add_argument("--nsteps", default="32", help="values of N+1")
    ap.add_argument("--include-setup-time", action="store_true")
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        example="ex1",
        alphas=[float(a) for a in args.alpha.split(",")],
        grids=[tuple(int(k) for k in g.split("x")) for g in args.grid.split(",")],
        nsteps=[int(n) for n in args.nsteps.split(",")],
        methods=["FDS-AAO"],
        include_setup_time=args.include_setup_time,
        out=args.out,
    )
    code, rows = run_sweep(cfg)
    for coarse, fine in zip(rows, rows[1:]):
        if coarse["N_plus_1"] == fine["N_plus_1"] and coarse["alpha"] == fine["alpha"]:
            print(f"alpha={coarse['alpha']} DoF {coarse['DoF']} -> {fine['DoF']}: "
                  f"E ratio {coarse['E_NJ'] / fine['E_NJ']:.3f}")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
