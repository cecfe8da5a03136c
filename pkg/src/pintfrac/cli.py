"""Command-line entry point: ``pintfrac {solve,sweep,verify,condnum}``.

List-valued flags take comma-separated values (``--alpha 0.1,0.5``); grids
are written ``31x31`` and several grids are comma-separated
(``--grid 31x31,63x63``).  ``--config FILE`` reads flat ``key = value`` lines
using the same keys as the long flags (``n-convention = N_plus_1``); flags
given on the command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .krylov import SolverConfig
from .problems import METHODS, RunResult, condition_number_report, get_example, make_grid, solve_problem
from .verification import run_checks

__all__ = ["ExperimentConfig", "CSV_COLUMNS", "main", "run_sweep", "run_verify", "result_row"]

CSV_COLUMNS = ["alpha", "N_plus_1", "J", "DoF", "method", "Iter", "CPU_seconds", "E_NJ", "RES", "converged"]

EXIT_OK, EXIT_NONCONVERGED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    example: str = "ex2"
    alphas: list[float] = field(default_factory=lambda: [0.5])
    grids: list[tuple[int, ...]] = field(default_factory=lambda: [(31, 31)])
    nsteps: list[int] = field(default_factory=lambda: [32])
    n_convention: str = "N_plus_1"
    methods: list[str] = field(default_factory=lambda: ["GMRES-2S"])
    tol: float = 1e-7
    max_iter: int = 2000
    restart: int = 50
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    seed: int = 0
    dense_cap: int = 4096
    include_setup_time: bool = False
    beta: float | None = None
    coef_value: float = 1.0

    def validate(self) -> None:
        if self.example not in ("ex1", "ex2", "ex3", "custom"):
            raise ConfigError(f"unknown example {self.example!r}")
        for name in ("alphas", "grids", "nsteps", "methods"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(not (0 < a < 1) for a in self.alphas):
            raise ConfigError("every alpha must lie in (0, 1)")
        if self.n_convention not in ("N", "N_plus_1"):
            raise ConfigError("n-convention must be 'N' or 'N_plus_1'")
        if any(n - (self.n_convention == "N_plus_1") < 1 for n in self.nsteps):
            raise ConfigError("every time-step count must give N >= 1")
        for mth in self.methods:
            if mth not in METHODS:
                raise ConfigError(f"unknown method {mth!r}; choose from {', '.join(METHODS)}")
        if "FDS-AAO" in self.methods and self.example in ("ex2", "ex3"):
            raise ConfigError("FDS-AAO requires a constant coefficient (ex1 or custom)")
        if self.example != "custom":
            dims = {"ex1": 2, "ex2": 2, "ex3": 3}[self.example]
            if any(len(g) != dims for g in self.grids):
                raise ConfigError(f"{self.example} needs {dims}-dimensional grids")
        if any(len(g) not in (1, 2, 3) or min(g) < 1 for g in self.grids):
            raise ConfigError("grids must have 1 to 3 positive entries")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def solver_config(self) -> SolverConfig:
        return SolverConfig(tol=self.tol, max_iter=self.max_iter, restart=self.restart)

    def steps(self, n: int) -> int:
        return n - 1 if self.n_convention == "N_plus_1" else n

    def tuples(self):
        for alpha in self.alphas:
            for m in self.grids:
                for n in self.nsteps:
                    for method in self.methods:
                        yield alpha, m, self.steps(n), method


def _parse_grid(text: str) -> tuple[int, ...]:
    return tuple(int(k) for k in text.lower().split("x"))


_LIST_PARSERS = {
    "alpha": ("alphas", lambda s: [float(x) for x in s.split(",")]),
    "grid": ("grids", lambda s: [_parse_grid(x) for x in s.split(",")]),
    "nsteps": ("nsteps", lambda s: [int(x) for x in s.split(",")]),
    "method": ("methods", lambda s: [x.strip() for x in s.split(",")]),
}
_SCALAR_PARSERS = {
    "example": str,
    "n-convention": str,
    "tol": float,
    "max-iter": int,
    "restart": int,
    "out": str,
    "format": str,
    "jobs": int,
    "seed": int,
    "dense-cap": int,
    "include-setup-time": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
    "beta": float,
    "coef-value": float,
}


def _apply(cfg: ExperimentConfig, key: str, value) -> None:
    key = key.strip().replace("_", "-")
    try:
        if key in _LIST_PARSERS:
            attr, parse = _LIST_PARSERS[key]
            setattr(cfg, attr, parse(value))
        elif key in _SCALAR_PARSERS:
            setattr(cfg, key.replace("-", "_"), _SCALAR_PARSERS[key](value))
        else:
            raise ConfigError(f"unknown config key {key!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def read_config_file(path: str | Path, cfg: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = cfg or ExperimentConfig()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        _apply(cfg, key, value.strip())
    return cfg


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = read_config_file(args.config) if getattr(args, "config", None) else ExperimentConfig()
    for key in list(_LIST_PARSERS) + list(_SCALAR_PARSERS):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None and val is not False:
            _apply(cfg, key, val)
    cfg.validate()
    return cfg


def result_row(r: RunResult) -> dict:
    return {
        "alpha": r.alpha,
        "N_plus_1": r.N_plus_1,
        "J": r.J,
        "DoF": r.DoF,
        "method": r.method,
        "Iter": r.iterations,
        "CPU_seconds": round(r.cpu_seconds, 6),
        "E_NJ": r.error,
        "RES": r.res,
        "converged": r.converged,
    }


def format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in row.items()})
    return buf.getvalue()


def _table(rows: list[dict]) -> str:
    head = f"{'alpha':>5} {'N+1':>6} {'J':>8} {'DoF':>10} {'method':>9} {'Iter':>5} {'CPU':>9} {'E_NJ':>10} {'RES':>10}"
    lines = [head]
    for r in rows:
        it = "" if r["Iter"] is None else r["Iter"]
        err = "" if r["E_NJ"] is None else f"{r['E_NJ']:.2e}"
        flag = "" if r["converged"] else "  (not converged)"
        lines.append(
            f"{r['alpha']:>5} {r['N_plus_1']:>6} {r['J']:>8} {r['DoF']:>10} {r['method']:>9} {it:>5} "
            f"{r['CPU_seconds']:>8.3f}s {err:>10} {r['RES']:>10.2e}{flag}"
        )
    return "\n".join(lines)


def _run_one(cfg: ExperimentConfig, alpha: float, m, N: int, method: str) -> RunResult:
    dims = len(m)
    p = get_example(cfg.example, alpha, dims=dims, coef_value=cfg.coef_value)
    grid = make_grid(p, m, N)
    return solve_problem(
        p, grid, method, cfg.solver_config(), beta=cfg.beta, include_setup_time=cfg.include_setup_time
    )


def run_sweep(cfg: ExperimentConfig, stream=None) -> tuple[int, list[dict]]:
    """Run every ``(alpha, grid, N, method)`` tuple; rows keep the tuple order."""
    stream = stream or sys.stdout
    cfg.validate()
    jobs = list(cfg.tuples())
    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(lambda t: _run_one(cfg, *t), jobs))
    else:
        results = [_run_one(cfg, *t) for t in jobs]
    rows = [result_row(r) for r in results]
    text = format_rows(rows, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    print(_table(rows), file=stream)
    code = EXIT_OK if all(r.converged for r in results) else EXIT_NONCONVERGED
    return code, rows


def run_verify(level: str = "fast", seed: int = 0, cap: int | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    results = run_checks(level, seed=seed, cap=cap)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.seconds:7.2f}s  {r.detail}", file=stream)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=stream)
        return 1
    print(f"all {len(results)} checks passed", file=stream)
    return 0


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--example", choices=["ex1", "ex2", "ex3", "custom"])
    p.add_argument("--alpha", help="fractional order(s), comma separated")
    p.add_argument("--grid", help="interior points per dimension, e.g. 31x31 (comma separated list)")
    p.add_argument("--nsteps", help="time-step count(s), read according to --n-convention")
    p.add_argument("--n-convention", choices=["N", "N_plus_1"])
    p.add_argument("--method", help=f"solver(s): {', '.join(METHODS)}")
    p.add_argument("--tol", type=float)
    p.add_argument("--restart", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--beta", type=float, help="override beta = sqrt(a_min a_max)")
    p.add_argument("--coef-value", type=float, help="coefficient value for --example custom")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dense-cap", type=int)
    p.add_argument("--include-setup-time", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pintfrac", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [("solve", "run a single solve"), ("sweep", "run a parameter sweep")]:
        _add_problem_flags(sub.add_parser(name, help=helptext))
    cond = sub.add_parser("condnum", help="dense condition number of the preconditioned matrix")
    _add_problem_flags(cond)
    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--level", choices=["fast", "full"], default="fast")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--dense-cap", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return run_verify(args.level, seed=args.seed, cap=args.dense_cap)
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"pintfrac: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "condnum":
        worst = 0
        for alpha in cfg.alphas:
            for m in cfg.grids:
                for n in cfg.nsteps:
                    p = get_example(cfg.example, alpha, dims=len(m), coef_value=cfg.coef_value)
                    grid = make_grid(p, m, cfg.steps(n))
                    try:
                        kappa, bound = condition_number_report(p, grid, cap=cfg.dense_cap, beta=cfg.beta)
                    except ValueError as exc:
                        print(f"pintfrac: {exc}", file=sys.stderr)
                        return EXIT_CONFIG
                    except AssertionError as exc:
                        print(f"pintfrac: {exc}", file=sys.stderr)
                        worst = 1
                        continue
                    print(f"alpha={alpha} grid={'x'.join(map(str, m))} N={grid.N}: kappa2={kappa:.10f} bound={bound:.10f}")
        return worst

    if args.command == "solve" and len(list(cfg.tuples())) != 1:
        print("pintfrac: solve takes exactly one alpha, grid, step count and method; use sweep", file=sys.stderr)
        return EXIT_CONFIG
    code, _ = run_sweep(cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
