"""Invariant suite behind ``pintfrac verify``.

Each check returns ``(passed, detail)``; exceptions inside a check count as
failures.  Module-level lookups (``ft.l1_weights`` etc.) are deliberate so a
patched kernel is picked up by every check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import allatonce as ao
from . import dense_oracle as do
from . import fractional_time as ft
from . import problems as pr
from . import spatial as spt

__all__ = ["CheckResult", "random_smooth_coefficient", "random_instance", "run_checks", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def random_smooth_coefficient(rng: np.random.Generator, dims: int, contrast: float | None = None) -> spt.CoefficientField:
    """Positive trigonometric field with analytically certified bounds.

    ``a(x) = c + sum_k r_k sin(w_k . x + phi_k)`` lies in ``[c - sum r_k, c + sum r_k]``.
    """
    n_modes = 3
    amps = rng.uniform(0.1, 1.0, n_modes)
    if contrast is None:
        contrast = rng.uniform(1.2, 4.0)
    # choose the mean so that (c + R) / (c - R) equals the requested contrast
    R = amps.sum()
    c = R * (contrast + 1) / (contrast - 1)
    freqs = rng.uniform(-6.0, 6.0, (n_modes, dims))
    phases = rng.uniform(0, 2 * np.pi, n_modes)

    def a(*x):
        out = c
        for r, w, ph in zip(amps, freqs, phases):
            out = out + r * np.sin(sum(wi * xi for wi, xi in zip(w, x)) + ph)
        return out

    return spt.CoefficientField(a, c - R, c + R, label="random-smooth")


def random_instance(rng: np.random.Generator, max_m: int = 6, max_N: int = 8, dims=(1, 2), alphas=(0.1, 0.5, 0.9)):
    d = int(rng.choice(dims))
    m = tuple(int(k) for k in rng.integers(2, max_m + 1, d))
    N = int(rng.integers(1, max_N + 1))
    alpha = float(rng.choice(alphas))
    grid = spt.SpaceTimeGrid.unit(m, N)
    a = random_smooth_coefficient(rng, d)
    T = ft.build_time_matrix(ft.l1_weights(alpha, N), grid.tau)
    return grid, a, T


def _rel(x, y) -> float:
    den = max(np.linalg.norm(y), 1e-300)
    return float(np.linalg.norm(np.asarray(x) - np.asarray(y)) / den)


# ---------------------------------------------------------------- checks


def check_time_matrix_positive(rng, cap):
    worst = np.inf
    for alpha in np.round(np.arange(0.1, 1.0, 0.1), 1):
        for N in (1, 2, 7, 16, 64):
            w = ft.l1_weights(alpha, N)
            T = ft.build_time_matrix(w, 1.0 / N).todense()
            if w.l[0] <= 0:
                return False, f"l_0 <= 0 at alpha={alpha}"
            worst = min(worst, np.linalg.eigvalsh(T + T.T).min())
    return worst > 0, f"min eig(T+T^T) = {worst:.3e}"


def check_quadrature_exactness(rng, cap):
    worst = 0.0
    for alpha in (0.1, 0.3, 0.5, 0.9):
        for N in (1, 5, 8, 32):
            tau = 1.0 / N
            w = ft.l1_weights(alpha, N)
            t = tau * np.arange(1, N + 1)
            zero = ft.caputo_quadrature(w, tau, np.full(N, 3.0), psi=3.0)
            lin = ft.caputo_quadrature(w, tau, t, psi=0.0)
            expect = t ** (1 - alpha) / math.gamma(2 - alpha)
            worst = max(worst, np.abs(zero).max() / 3.0, np.abs(lin - expect).max() / np.abs(expect).max())
    return worst <= 1e-12, f"max rel err = {worst:.2e}"


def check_toeplitz_kernels(rng, cap):
    worst = 0.0
    for n in (1, 2, 17, 64, 257, 512):
        col = rng.standard_normal(n)
        v = rng.standard_normal(n)
        t = ft.LowerTriangularToeplitz(col)
        D = t.todense()
        worst = max(worst, _rel(ft.toeplitz_matvec_lower(t, v), D @ v), _rel(ft.toeplitz_matvec_upper(t, v), D.T @ v))
    return worst <= 1e-12, f"max rel err vs dense = {worst:.2e}"


def check_iltt_inverse(rng, cap):
    worst = 0.0
    for n in (1, 2, 17, 64, 257):
        col = rng.uniform(-1, 1, n) / (np.arange(n) + 1.0) ** 2
        col[0] = 1.0
        t = ft.LowerTriangularToeplitz(col)
        x = ft.iltt_inverse_first_column(t)
        e1 = np.zeros(n)
        e1[0] = 1.0
        v = rng.standard_normal(n)
        back = ft.toeplitz_matvec_lower(t, ft.toeplitz_matvec_lower(ft.LowerTriangularToeplitz(x), v))
        worst = max(worst, _rel(ft.toeplitz_matvec_lower(t, x), e1), _rel(back, v))
    return worst <= 1e-12, f"max residual = {worst:.2e}"


def check_fst(rng, cap):
    worst = 0.0
    for m in (1, 2, 3, 10, 31, 100):
        v = rng.standard_normal(m)
        worst = max(worst, _rel(spt.fst_1d(spt.fst_1d(v)), v), _rel(spt.fst_1d(v), do.dense_sine_matrix(m) @ v))
    grid = spt.SpaceTimeGrid.unit((3, 4, 2), 3)
    v = rng.standard_normal(grid.size)
    worst = max(worst, _rel(spt.apply_Q_kron_IN(grid, spt.apply_Q_kron_IN(grid, v)), v))
    worst = max(worst, _rel(spt.apply_Q_kron_IN(grid, v), np.kron(do.dense_Q(grid), np.eye(3)) @ v))
    return worst <= 1e-12, f"max rel err = {worst:.2e}"


def check_diagonalization(rng, cap):
    worst = 0.0
    for m in [(1,), (8,), (3, 5), (6, 6), (3, 4, 2), (4, 4, 4)]:
        grid = spt.SpaceTimeGrid.unit(m, 1)
        Q = do.dense_Q(grid)
        lam = spt.laplacian_eigenvalues(grid).values
        L1 = do.dense_constant_laplacian(grid)
        worst = max(worst, np.abs(Q @ np.diag(lam) @ Q - L1).max() / np.abs(L1).max())
        worst = max(worst, np.abs(spt.assemble_constant_laplacian(grid).todense() - L1).max() / np.abs(L1).max())
    return worst <= 1e-12, f"max rel entry err = {worst:.2e}"


def check_spatial_assumptions(rng, cap):
    msgs = []
    ok = True
    for m in [(7,), (5, 4), (3, 3, 3)]:
        grid = spt.SpaceTimeGrid.unit(m, 1)
        a = random_smooth_coefficient(rng, grid.dims)
        b = random_smooth_coefficient(rng, grid.dims)
        La = spt.assemble_variable_laplacian(grid, a).todense()
        Lb = spt.assemble_variable_laplacian(grid, b).todense()
        ab = spt.CoefficientField(lambda *x: a(*x) + b(*x), a.a_min + b.a_min, a.a_max + b.a_max)
        Lab = spt.assemble_variable_laplacian(grid, ab).todense()
        L1 = spt.assemble_constant_laplacian(grid).todense()
        sym = np.abs(La - La.T).max()
        lin = np.abs(Lab - La - Lb).max() / np.abs(Lab).max()
        dense = np.abs(La - do.dense_variable_laplacian(grid, a)).max() / np.abs(La).max()
        gen = sla.eigh(La, L1, eigvals_only=True)
        lo, hi = gen.min(), gen.max()
        ok &= sym == 0.0 and lin <= 1e-13 and dense <= 1e-13 and np.linalg.eigvalsh(La).min() > 0
        ok &= lo >= a.a_min * (1 - 1e-10) and hi <= a.a_max * (1 + 1e-10)
        msgs.append(f"{m}: gen-eig [{lo:.3f},{hi:.3f}] in [{a.a_min:.3f},{a.a_max:.3f}]")
    return bool(ok), "; ".join(msgs)


def _probe_instances(rng, cap):
    sizes = [((2,), 2), ((3, 3), 4), ((4, 3), 6), ((2, 2, 2), 3)]
    if cap >= 4096:
        sizes += [((8, 8), 8), ((6, 5, 4), 4)]
    for m, N in sizes:
        if int(np.prod(m)) * N > cap:
            continue
        grid = spt.SpaceTimeGrid.unit(m, N)
        a = random_smooth_coefficient(rng, grid.dims)
        T = ft.build_time_matrix(ft.l1_weights(float(rng.choice([0.1, 0.5, 0.9])), N), grid.tau)
        yield grid, a, T


def check_operator_probing(rng, cap):
    worst = 0.0
    for grid, a, T in _probe_instances(rng, cap):
        dense = do.dense_assemble_all(grid, a, T, cap=cap)
        op = ao.AllAtOnceOperator(spt.assemble_variable_laplacian(grid, a), T, grid)
        pre = ao.build_preconditioner(grid, T, a)
        n = grid.size
        probes = np.eye(n) if n <= 256 else rng.standard_normal((20, n))
        Pl_inv = np.linalg.inv(dense.P_l)
        Pr_inv = np.linalg.inv(dense.P_r)
        pairs = [
            (lambda v: ao.apply_A(op, v), dense.A),
            (lambda v: ao.apply_A_transpose(op, v), dense.A.T),
            (lambda v: ao.apply_Pr_inv(pre, v), Pr_inv),
            (lambda v: ao.apply_Pl_inv(pre, v), Pl_inv),
            (lambda v: ao.apply_Pl_inv_transpose(pre, v), Pl_inv.T),
            (lambda v: ao.apply_preconditioned(op, pre, v), Pl_inv @ dense.A @ Pr_inv),
        ]
        for fast, M in pairs:
            for v in probes:
                worst = max(worst, _rel(fast(v), M @ v))
    return worst <= 1e-12, f"max rel err = {worst:.2e}"


def check_constant_identity(rng, cap):
    worst = 0.0
    for m, N in [((1,), 1), ((5,), 7), ((6, 7), 9), ((4, 3, 5), 6), ((31, 31), 100)]:
        grid = spt.SpaceTimeGrid.unit(m, N)
        c = float(rng.uniform(0.5, 5.0))
        a = spt.CoefficientField.constant(c)
        T = ft.build_time_matrix(ft.l1_weights(0.5, N), grid.tau)
        op = ao.AllAtOnceOperator(spt.assemble_variable_laplacian(grid, a), T, grid)
        pre = ao.build_preconditioner(grid, T, a)
        v = rng.standard_normal(grid.size)
        worst = max(worst, _rel(ao.apply_preconditioned(op, pre, v), v))
    return worst <= 1e-10, f"max rel deviation from identity = {worst:.2e}"


def check_condition_bound(rng, cap):
    n_inst = 20 if cap < 4096 else 50
    worst_ratio = 0.0
    for _ in range(n_inst):
        grid, a, T = random_instance(rng)
        dense = do.dense_assemble_all(grid, a, T, cap=cap)
        s = np.linalg.svd(dense.preconditioned(), compute_uv=False)
        bound = a.a_max / a.a_min
        if s[0] / s[-1] > bound + 1e-8:
            return False, f"kappa {s[0] / s[-1]:.6f} > bound {bound:.6f} on m={grid.m}, N={grid.N}"
        if s[-1] < math.sqrt(1 / bound) - 1e-8 or s[0] > math.sqrt(bound) + 1e-8:
            return False, f"singular values [{s[-1]:.6f}, {s[0]:.6f}] escape the bracket (bound {bound:.4f})"
        worst_ratio = max(worst_ratio, (s[0] / s[-1]) / bound)
    return True, f"{n_inst} instances, max kappa/bound = {worst_ratio:.4f}"


def check_time_stepping_equivalence(rng, cap):
    cases = [("ex1", (7, 7), 8), ("ex2", (7, 7), 8), ("ex3", (5, 5, 5), 4)]
    if cap >= 4096:
        cases = [("ex1", (15, 15), 16), ("ex2", (15, 15), 16), ("ex3", (7, 7, 7), 8)]
    worst = 0.0
    for name, m, N in cases:
        p = pr.get_example(name, 0.5)
        grid = pr.make_grid(p, m, N)
        ref = pr.time_stepping_reference(p, grid, cap=cap)
        methods = ["FDS-AAO"] if p.coefficient.is_constant else ["GMRES-2S", "NCG-2S"]
        for method in methods:
            _, u = pr.solve_problem(p, grid, method, return_solution=True)
            worst = max(worst, np.abs(u - ref).max() / np.abs(ref).max())
    return worst <= 1e-6, f"max rel diff = {worst:.2e}"


def check_ex2_condition_number(rng, cap):
    p = pr.example2(0.5)
    grid = pr.make_grid(p, (7, 7), 8)
    kappa, bound = pr.condition_number_report(p, grid, cap=cap)
    return kappa <= 1.05 + 1e-8, f"kappa = {kappa:.8f} (bound {bound:.4f})"


CHECKS: list[tuple[str, Callable, str]] = [
    ("time-matrix-positivity", check_time_matrix_positive, "fast"),
    ("quadrature-exactness", check_quadrature_exactness, "fast"),
    ("toeplitz-matvec", check_toeplitz_kernels, "fast"),
    ("iltt-inverse", check_iltt_inverse, "fast"),
    ("fst-involution", check_fst, "fast"),
    ("laplacian-diagonalization", check_diagonalization, "fast"),
    ("spatial-assumptions", check_spatial_assumptions, "fast"),
    ("operator-probing", check_operator_probing, "fast"),
    ("constant-identity", check_constant_identity, "fast"),
    ("condition-number-bound", check_condition_bound, "fast"),
    ("time-stepping-equivalence", check_time_stepping_equivalence, "fast"),
    ("ex2-condition-number", check_ex2_condition_number, "full"),
]


def run_checks(level: str = "fast", seed: int = 0, cap: int | None = None) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    if cap is None:
        cap = 512 if level == "fast" else 4096
    results = []
    for name, fn, tier in CHECKS:
        if tier == "full" and level != "full":
            continue
        rng = np.random.default_rng([seed, len(results)])
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng, cap)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results
