"""Matrix-free restarted GMRES and CG on the normal equations (CGNR).

Both start from the zero vector and stop once ``||b - A x||_2 <= tol ||b||_2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["SolverConfig", "SolveReport", "gmres_restarted", "ncg"]

Operator = Callable[[np.ndarray], np.ndarray]

BREAKDOWN_TOL = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_iter: int = 1000
    restart: int = 50
    record_history: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    final_relres: float
    residual_history: list[float] = field(default_factory=list)


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def gmres_restarted(apply: Operator, b: np.ndarray, cfg: SolverConfig = SolverConfig()) -> tuple[np.ndarray, SolveReport]:
    """Restarted GMRES(``cfg.restart``) with modified Gram-Schmidt and Givens rotations.

    ``iterations`` counts inner (Arnoldi) steps over all cycles.  The
    history holds the absolute residual norm, starting with ``||b||``.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    history = [bnorm] if cfg.record_history else []
    if bnorm == 0.0:
        return x, SolveReport(0, True, 0.0, history)

    target = cfg.tol * bnorm
    r = b.copy()
    rnorm = bnorm
    its = 0
    while its < cfg.max_iter:
        k_max = min(cfg.restart, cfg.max_iter - its)
        V = np.zeros((k_max + 1, n))
        H = np.zeros((k_max + 1, k_max))
        cs = np.zeros(k_max)
        sn = np.zeros(k_max)
        g = np.zeros(k_max + 1)
        g[0] = rnorm
        V[0] = r / rnorm
        k = 0
        while k < k_max:
            # copy: an operator may hand back its input
            w = np.array(apply(V[k]), dtype=float)
            for i in range(k + 1):
                H[i, k] = np.dot(V[i], w)
                w -= H[i, k] * V[i]
            H[k + 1, k] = np.linalg.norm(w)
            breakdown = H[k + 1, k] <= BREAKDOWN_TOL * bnorm
            if not breakdown:
                V[k + 1] = w / H[k + 1, k]
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            cs[k], sn[k] = _givens(H[k, k], H[k + 1, k])
            H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            k += 1
            its += 1
            if cfg.record_history:
                history.append(abs(g[k]))
            if abs(g[k]) <= target or breakdown:
                break
        y = np.linalg.solve(np.triu(H[:k, :k]), g[:k]) if k else np.zeros(0)
        x += V[:k].T @ y
        r = b - apply(x)
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target:
            return x, SolveReport(its, True, rnorm / bnorm, history)
        if rnorm == 0.0:
            break
    return x, SolveReport(its, False, rnorm / bnorm, history)


def ncg(
    apply: Operator,
    apply_transpose: Operator,
    b: np.ndarray,
    cfg: SolverConfig = SolverConfig(),
) -> tuple[np.ndarray, SolveReport]:
    """Conjugate gradients on ``A^T A x = A^T b`` (CGNR).

    The recurrence carries ``r = b - A x`` of the unsquared system, so the
    stopping test is on ``||r||`` directly; on declared convergence the true
    residual is recomputed and, if it disagrees, CG restarts from it.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros(b.shape[0])
    bnorm = float(np.linalg.norm(b))
    history = [bnorm] if cfg.record_history else []
    if bnorm == 0.0:
        return x, SolveReport(0, True, 0.0, history)

    target = cfg.tol * bnorm
    r = b.copy()
    its = 0
    while its < cfg.max_iter:
        z = np.array(apply_transpose(r), dtype=float)
        p = z.copy()
        zz = float(np.dot(z, z))
        while its < cfg.max_iter:
            if zz == 0.0:
                break
            w = np.array(apply(p), dtype=float)
            step = zz / float(np.dot(w, w))
            x += step * p
            r -= step * w
            its += 1
            rnorm = float(np.linalg.norm(r))
            if cfg.record_history:
                history.append(rnorm)
            if rnorm <= target:
                break
            z = np.array(apply_transpose(r), dtype=float)
            zz_new = float(np.dot(z, z))
            p = z + (zz_new / zz) * p
            zz = zz_new
        r = b - apply(x)
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target:
            return x, SolveReport(its, True, rnorm / bnorm, history)
        if zz == 0.0:
            break
    return x, SolveReport(its, False, rnorm / bnorm, history)
