"""Model problems, right-hand sides, end-to-end solves and error metrics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fractional_time as ft
from .allatonce import (
    AllAtOnceOperator,
    apply_A,
    apply_A_transpose,
    apply_Pl_inv,
    apply_Pr_inv,
    apply_preconditioned,
    apply_preconditioned_transpose,
    build_preconditioner,
    direct_solve_constant,
)
from .dense_oracle import DEFAULT_DENSE_CAP, dense_assemble_all, dense_condition_number, dense_time_stepping
from .krylov import SolverConfig, gmres_restarted, ncg
from .spatial import CoefficientField, SpaceTimeGrid, assemble_variable_laplacian

__all__ = [
    "METHODS",
    "ProblemDefinition",
    "RunResult",
    "Discretization",
    "example1",
    "example2",
    "example3",
    "constant_problem",
    "get_example",
    "make_grid",
    "discretize",
    "assemble_rhs",
    "permute_time_space",
    "solve_problem",
    "run_method",
    "time_stepping_reference",
    "condition_number_report",
]

METHODS = ("GMRES-2S", "NCG-2S", "GMRES-I", "FDS-AAO")


@dataclass(frozen=True)
class ProblemDefinition:
    """Time-fractional diffusion problem on a box with zero Dirichlet data.

    ``source(t, *x)``, ``initial(*x)`` and ``exact(t, *x)`` take coordinate
    arrays; ``exact`` is optional.
    """

    label: str
    alpha: float
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    T_end: float
    coefficient: CoefficientField
    source: Callable[..., np.ndarray]
    initial: Callable[..., np.ndarray]
    exact: Optional[Callable[..., np.ndarray]] = None

    @property
    def dims(self) -> int:
        return len(self.lower)


@dataclass
class RunResult:
    method: str
    alpha: float
    N: int
    J: int
    DoF: int
    iterations: Optional[int]
    cpu_seconds: float
    error: Optional[float]
    res: float
    converged: bool
    label: str = ""
    residual_history: list[float] = field(default_factory=list, repr=False)

    @property
    def N_plus_1(self) -> int:
        return self.N + 1


# ---------------------------------------------------------------- examples


def example1(alpha: float) -> ProblemDefinition:
    """Constant coefficient on (0, pi)^2 with u = sin x sin y t^2 + x(pi-x) y(pi-y)."""
    g3 = math.gamma(3 - alpha)
    pi = math.pi

    def exact(t, x, y):
        return np.sin(x) * np.sin(y) * t**2 + x * (pi - x) * y * (pi - y)

    def source(t, x, y):
        return np.sin(x) * np.sin(y) * (2 * t ** (2 - alpha) / g3 + 2 * t**2) + 2 * (x * (pi - x) + y * (pi - y))

    return ProblemDefinition(
        label="ex1",
        alpha=alpha,
        lower=(0.0, 0.0),
        upper=(pi, pi),
        T_end=1.0,
        coefficient=CoefficientField.constant(1.0),
        source=source,
        initial=lambda x, y: exact(0.0, x, y),
        exact=exact,
    )


def example2(alpha: float) -> ProblemDefinition:
    """a = 40 + x^3.5 + y^3.5 on (0,1)^2 with u = sin(pi x) sin(pi y) t^2."""
    g3 = math.gamma(3 - alpha)
    pi = math.pi

    def a(x, y):
        return 40.0 + x**3.5 + y**3.5

    def exact(t, x, y):
        return np.sin(pi * x) * np.sin(pi * y) * t**2

    def source(t, x, y):
        ax, ay = 3.5 * x**2.5, 3.5 * y**2.5
        sx, sy, cx, cy = np.sin(pi * x), np.sin(pi * y), np.cos(pi * x), np.cos(pi * y)
        return sx * sy * (2 * t ** (2 - alpha) / g3 + 2 * pi**2 * a(x, y) * t**2) - pi * t**2 * (ax * cx * sy + ay * sx * cy)

    return ProblemDefinition(
        label="ex2",
        alpha=alpha,
        lower=(0.0, 0.0),
        upper=(1.0, 1.0),
        T_end=1.0,
        coefficient=CoefficientField(a, 40.0, 42.0, label="40+x^3.5+y^3.5"),
        source=source,
        initial=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        exact=exact,
    )


def example3(alpha: float) -> ProblemDefinition:
    """Piecewise-constant a (2 for x < 1/2, 2.5 otherwise) on (0,1)^3; no exact solution."""
    g3 = math.gamma(3 - alpha)

    def a(x, y, z):
        return np.where(np.asarray(x) < 0.5, 2.0, 2.5) + 0.0 * (y + z)

    def source(t, x, y, z):
        return x * y * z * (1 - x) * (1 - y) * (1 - z) * (t**2 + 2 * t ** (2 - alpha) / g3)

    return ProblemDefinition(
        label="ex3",
        alpha=alpha,
        lower=(0.0, 0.0, 0.0),
        upper=(1.0, 1.0, 1.0),
        T_end=1.0,
        coefficient=CoefficientField(a, 2.0, 2.5, label="jump 2|2.5"),
        source=source,
        initial=lambda x, y, z: np.zeros(np.broadcast(x, y, z).shape),
    )


def constant_problem(alpha: float, dims: int, value: float = 1.0) -> ProblemDefinition:
    """Constant coefficient, unit source and zero initial data on the unit box."""
    return ProblemDefinition(
        label="custom",
        alpha=alpha,
        lower=(0.0,) * dims,
        upper=(1.0,) * dims,
        T_end=1.0,
        coefficient=CoefficientField.constant(value),
        source=lambda t, *x: np.ones(np.broadcast(t, *x).shape),
        initial=lambda *x: np.zeros(np.broadcast(*x).shape),
    )


_EXAMPLES = {"ex1": example1, "ex2": example2, "ex3": example3}


def get_example(name: str, alpha: float, dims: int = 2, coef_value: float = 1.0) -> ProblemDefinition:
    if name == "custom":
        return constant_problem(alpha, dims, coef_value)
    try:
        return _EXAMPLES[name](alpha)
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from ex1, ex2, ex3, custom") from None


def make_grid(p: ProblemDefinition, m, N: int) -> SpaceTimeGrid:
    m = tuple(m)
    if len(m) != p.dims:
        raise ValueError(f"{p.label} is {p.dims}-dimensional but grid {m} has {len(m)} entries")
    return SpaceTimeGrid(p.lower, p.upper, m, N, p.T_end)


# ---------------------------------------------------------------- assembly


@dataclass(frozen=True)
class Discretization:
    problem: ProblemDefinition
    grid: SpaceTimeGrid
    weights: ft.L1Weights
    operator: AllAtOnceOperator

    @property
    def T(self) -> ft.LowerTriangularToeplitz:
        return self.operator.T


def discretize(p: ProblemDefinition, grid: SpaceTimeGrid) -> Discretization:
    w = ft.l1_weights(p.alpha, grid.N)
    T = ft.build_time_matrix(w, grid.tau)
    La = assemble_variable_laplacian(grid, p.coefficient)
    return Discretization(p, grid, w, AllAtOnceOperator(La, T, grid))


def permute_time_space(v: np.ndarray, N: int, J: int, direction: str = "to_space_outer") -> np.ndarray:
    """Reorder between time-outer (``n J + j``) and space-outer (``j N + n``) layouts."""
    v = np.asarray(v)
    if v.shape != (N * J,):
        raise ValueError(f"expected length N*J = {N * J}, got shape {v.shape}")
    if direction == "to_space_outer":
        return v.reshape(N, J).T.ravel()
    if direction == "to_time_outer":
        return v.reshape(J, N).T.ravel()
    raise ValueError(f"unknown direction {direction!r}")


def _rhs_time_outer(disc: Discretization) -> np.ndarray:
    p, grid, w = disc.problem, disc.grid, disc.weights
    X = grid.mesh()
    psi = np.asarray(p.initial(*X), dtype=float).ravel()
    F = np.stack([np.asarray(p.source(t, *X), dtype=float).ravel() for t in grid.times()])
    # initial-data term of the quadrature moves to the right-hand side
    F -= grid.tau ** (-p.alpha) * np.outer(w.init_weight, psi)
    return F


def assemble_rhs(p: ProblemDefinition, grid: SpaceTimeGrid, disc: Discretization | None = None) -> np.ndarray:
    """All-at-once right-hand side in the space-outer layout."""
    disc = disc or discretize(p, grid)
    return _rhs_time_outer(disc).T.ravel()


def exact_solution(p: ProblemDefinition, grid: SpaceTimeGrid) -> np.ndarray | None:
    if p.exact is None:
        return None
    X = grid.mesh()
    U = np.stack([np.asarray(p.exact(t, *X), dtype=float).ravel() for t in grid.times()])
    return U.T.ravel()


def time_stepping_reference(p: ProblemDefinition, grid: SpaceTimeGrid, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Sequential dense-solve reference solution (space-outer layout)."""
    if grid.size > cap:
        raise ValueError(f"N*J = {grid.size} exceeds the dense cap {cap}")
    disc = discretize(p, grid)
    U = dense_time_stepping(disc.operator.La.todense(), disc.T, _rhs_time_outer(disc))
    return U.T.ravel()


# ---------------------------------------------------------------- solving


def run_method(
    disc: Discretization,
    f: np.ndarray,
    method: str,
    cfg: SolverConfig = SolverConfig(),
    beta: float | None = None,
    include_setup_time: bool = False,
):
    """Solve ``A u = f`` with one of ``METHODS``.

    Returns ``(u, report_or_None, seconds)``.
    """
    op = disc.operator
    a = disc.problem.coefficient
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "FDS-AAO" and not a.is_constant:
        raise ValueError("FDS-AAO is only available for constant coefficients")

    t0 = time.perf_counter()
    if method == "GMRES-I":
        t1 = time.perf_counter()
        u, rep = gmres_restarted(lambda v: apply_A(op, v), f, cfg)
        return u, rep, time.perf_counter() - t1

    pre = build_preconditioner(disc.grid, op.T, a, beta=beta)
    t1 = time.perf_counter()
    start = t0 if include_setup_time else t1
    if method == "FDS-AAO":
        u = direct_solve_constant(pre, f)
        return u, None, time.perf_counter() - start

    rhs = apply_Pl_inv(pre, f)
    if method == "GMRES-2S":
        uhat, rep = gmres_restarted(lambda v: apply_preconditioned(op, pre, v), rhs, cfg)
    else:
        uhat, rep = ncg(
            lambda v: apply_preconditioned(op, pre, v),
            lambda v: apply_preconditioned_transpose(op, pre, v),
            rhs,
            cfg,
        )
    u = apply_Pr_inv(pre, uhat)
    return u, rep, time.perf_counter() - start


def solve_problem(
    p: ProblemDefinition,
    grid: SpaceTimeGrid,
    method: str,
    cfg: SolverConfig = SolverConfig(),
    beta: float | None = None,
    include_setup_time: bool = False,
    return_solution: bool = False,
):
    """End-to-end solve with error (``E_{N,J}``) and residual (``RES``) metrics.

    The error is measured over the unknowns only, i.e. time levels 1..N.
    """
    disc = discretize(p, grid)
    f = assemble_rhs(p, grid, disc)
    u, rep, seconds = run_method(disc, f, method, cfg, beta=beta, include_setup_time=include_setup_time)
    fnorm = np.linalg.norm(f)
    res = float(np.linalg.norm(f - apply_A(disc.operator, u)) / fnorm) if fnorm > 0 else 0.0
    ue = exact_solution(p, grid)
    err = float(np.max(np.abs(u - ue))) if ue is not None else None
    result = RunResult(
        method=method,
        alpha=p.alpha,
        N=grid.N,
        J=grid.J,
        DoF=grid.size,
        iterations=rep.iterations if rep is not None else None,
        cpu_seconds=seconds,
        error=err,
        res=res,
        converged=rep.converged if rep is not None else bool(np.isfinite(res)),
        label=p.label,
        residual_history=rep.residual_history if rep is not None else [],
    )
    return (result, u) if return_solution else result


def condition_number_report(
    p: ProblemDefinition,
    grid: SpaceTimeGrid,
    cap: int = DEFAULT_DENSE_CAP,
    beta: float | None = None,
    slack: float = 1e-8,
) -> tuple[float, float]:
    """Dense ``kappa_2(P_l^{-1} A P_r^{-1})`` together with the bound ``a_max / a_min``."""
    disc = discretize(p, grid)
    dense = dense_assemble_all(grid, p.coefficient, disc.T, beta=beta, cap=cap)
    kappa = dense_condition_number(dense.preconditioned())
    bound = p.coefficient.a_max / p.coefficient.a_min
    if beta is None and kappa > bound + slack:
        raise AssertionError(f"condition number {kappa:.10g} exceeds the bound {bound:.10g}")
    return kappa, bound
