"""Dense reference matrices for small instances.

Everything here is built independently of the fast paths: the variable
Laplacian is assembled point by point, Kronecker products are formed
explicitly and fractional powers come from a symmetric eigendecomposition.
Only used by tests, the ``verify`` command and condition-number reports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fractional_time import LowerTriangularToeplitz
from .spatial import CoefficientField, SpaceTimeGrid

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DenseSystem",
    "dense_variable_laplacian",
    "dense_constant_laplacian",
    "dense_sine_matrix",
    "dense_Q",
    "dense_assemble_all",
    "dense_condition_number",
    "dense_spd_power",
    "dense_time_stepping",
]

DEFAULT_DENSE_CAP = 4096


def dense_variable_laplacian(grid: SpaceTimeGrid, a: CoefficientField) -> np.ndarray:
    h = grid.h
    x = grid.axes()
    J = grid.J
    strides = [int(np.prod(grid.m[i + 1:])) for i in range(grid.dims)]
    L = np.zeros((J, J))
    for idx in itertools.product(*(range(k) for k in grid.m)):
        row = sum(i * s for i, s in zip(idx, strides))
        point = [x[d][idx[d]] for d in range(grid.dims)]
        for d in range(grid.dims):
            for sign in (-1, 1):
                mid = list(point)
                mid[d] = point[d] + sign * h[d] / 2
                coef = float(a(*[np.asarray(c) for c in mid])) / h[d] ** 2
                L[row, row] += coef
                nb = idx[d] + sign
                if 0 <= nb < grid.m[d]:
                    L[row, row + sign * strides[d]] -= coef
    return L


def dense_constant_laplacian(grid: SpaceTimeGrid) -> np.ndarray:
    L = np.zeros((grid.J, grid.J))
    for d, (k, h) in enumerate(zip(grid.m, grid.h)):
        W = 2 * np.eye(k) - np.eye(k, k=1) - np.eye(k, k=-1)
        left = np.eye(int(np.prod(grid.m[:d])))
        right = np.eye(int(np.prod(grid.m[d + 1:])))
        L += np.kron(np.kron(left, W / h**2), right)
    return L


def dense_sine_matrix(m: int) -> np.ndarray:
    i = np.arange(1, m + 1)
    return np.sqrt(2.0 / (m + 1)) * np.sin(np.outer(i, i) * np.pi / (m + 1))


def dense_Q(grid: SpaceTimeGrid) -> np.ndarray:
    Q = np.ones((1, 1))
    for k in grid.m:
        Q = np.kron(Q, dense_sine_matrix(k))
    return Q


def dense_spd_power(M: np.ndarray, z: float) -> np.ndarray:
    """``V diag(d^z) V^T`` for symmetric positive (semi-)definite ``M``."""
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    d, V = np.linalg.eigh(M)
    scale = np.abs(d).max() if d.size else 0.0
    if d.size and d.min() < -1e-12 * scale:
        raise ValueError(f"matrix is not positive semi-definite (min eigenvalue {d.min():.3e})")
    d = np.clip(d, 0.0, None)
    if z < 0 and np.any(d == 0.0):
        raise ValueError("negative power of a singular matrix")
    return (V * d**z) @ V.T


def dense_condition_number(M: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s[-1] < 1e-14 * s[0]:
        raise np.linalg.LinAlgError(f"numerically singular matrix (sigma_min/sigma_max = {s[-1] / s[0]:.2e})")
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class DenseSystem:
    A: np.ndarray
    P_l: np.ndarray
    P_r: np.ndarray
    T: np.ndarray
    L_a: np.ndarray
    L_1: np.ndarray
    beta: float

    def preconditioned(self) -> np.ndarray:
        """``P_l^{-1} A P_r^{-1}``."""
        right = np.linalg.solve(self.P_r.T, self.A.T).T
        return np.linalg.solve(self.P_l, right)


def dense_assemble_all(
    grid: SpaceTimeGrid,
    a: CoefficientField,
    T: LowerTriangularToeplitz,
    beta: float | None = None,
    cap: int = DEFAULT_DENSE_CAP,
) -> DenseSystem:
    if grid.size > cap:
        raise ValueError(f"N*J = {grid.size} exceeds the dense cap {cap}")
    if beta is None:
        beta = float(np.sqrt(a.a_min * a.a_max))
    N = grid.N
    Tm = sla.toeplitz(T.first_col, np.zeros(N))
    La = dense_variable_laplacian(grid, a)
    L1 = dense_constant_laplacian(grid)
    I_N = np.eye(N)
    A = np.kron(La, I_N) + np.kron(np.eye(grid.J), Tm)
    half = dense_spd_power(beta * L1, 0.5)
    mhalf = dense_spd_power(beta * L1, -0.5)
    P_r = np.kron(half, I_N)
    P_l = np.kron(mhalf, Tm) + np.kron(half, I_N)
    return DenseSystem(A, P_l, P_r, Tm, La, L1, float(beta))


def dense_time_stepping(La: np.ndarray, T: LowerTriangularToeplitz, rhs_time_outer: np.ndarray) -> np.ndarray:
    """Sequential solve of ``sum_k T[n,k] u^k + L_a u^n = f^n`` step by step.

    ``rhs_time_outer`` has shape ``(N, J)``; returns the same shape.
    """
    N, J = rhs_time_outer.shape
    col = T.first_col
    lu = sla.lu_factor(La + col[0] * np.eye(J))
    U = np.zeros((N, J))
    for n in range(N):
        hist = rhs_time_outer[n].copy()
        for k in range(n):
            hist -= col[n - k] * U[k]
        U[n] = sla.lu_solve(lu, hist)
    return U
