"""Matrix-free all-at-once operator ``A = L_a (x) I_N + I_J (x) T`` and the
two-sided preconditioner built from the constant-coefficient matrix
``P = (beta L_1) (x) I_N + I_J (x) T = P_r P_l``.

All vectors use the space-outer/time-inner layout (index ``j * N + n``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .fractional_time import (
    LowerTriangularToeplitz,
    iltt_inverse_first_column,
    toeplitz_matvec_lower,
    toeplitz_matvec_upper,
)
from .spatial import (
    CoefficientField,
    LaplacianEigen,
    SpaceTimeGrid,
    VariableLaplacian,
    apply_Q_kron_IN,
    laplacian_eigenvalues,
)

__all__ = [
    "AllAtOnceOperator",
    "TwoSidedPreconditioner",
    "build_preconditioner",
    "apply_A",
    "apply_A_transpose",
    "apply_Pr_inv",
    "apply_Pl_inv",
    "apply_Pl_inv_transpose",
    "apply_preconditioned",
    "apply_preconditioned_transpose",
    "direct_solve_constant",
]


@dataclass(frozen=True)
class AllAtOnceOperator:
    La: VariableLaplacian
    T: LowerTriangularToeplitz
    grid: SpaceTimeGrid

    def __post_init__(self):
        if self.T.n != self.grid.N:
            raise ValueError(f"time matrix has n={self.T.n} but grid has N={self.grid.N}")
        if self.La.entries.shape != (self.grid.J, self.grid.J):
            raise ValueError("spatial operator does not match grid size")


@dataclass(frozen=True)
class TwoSidedPreconditioner:
    """Precomputed data for ``P_r^{-1}`` and ``P_l^{-1}``.

    ``inv_cols[i]`` is the first column of ``T_i^{-1}`` with
    ``T_i = (beta lam_i)^{-1/2} T + (beta lam_i)^{1/2} I_N``.
    """

    grid: SpaceTimeGrid
    beta: float
    eigen: LaplacianEigen
    T: LowerTriangularToeplitz
    inv_cols: np.ndarray
    coefficient_constant: float | None = None

    @property
    def sqrt_beta_lambda(self) -> np.ndarray:
        return np.sqrt(self.beta * self.eigen.values)

    def block_first_columns(self) -> np.ndarray:
        """First columns of every ``T_i``, shape ``(J, N)``."""
        s = self.sqrt_beta_lambda[:, None]
        cols = self.T.first_col[None, :] / s
        cols[:, 0] += s[:, 0]
        return cols

    def inv_spectrum(self, size: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_inv_spec", {})
        fhat = cache.get(size)
        if fhat is None:
            fhat = sfft.rfft(self.inv_cols, n=size, axis=-1)
            cache[size] = fhat
        return fhat


def build_preconditioner(
    grid: SpaceTimeGrid,
    T: LowerTriangularToeplitz,
    a: CoefficientField | None = None,
    beta: float | None = None,
) -> TwoSidedPreconditioner:
    """Set up the two-sided preconditioner.

    ``beta`` defaults to ``sqrt(a_min * a_max)`` of the coefficient bounds.
    """
    if beta is None:
        if a is None:
            raise ValueError("need a coefficient field or an explicit beta")
        beta = math.sqrt(a.a_min * a.a_max)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if T.n != grid.N:
        raise ValueError(f"time matrix has n={T.n} but grid has N={grid.N}")
    eigen = laplacian_eigenvalues(grid)
    const = a.a_min if (a is not None and a.is_constant) else None
    pre = TwoSidedPreconditioner(grid, float(beta), eigen, T, np.empty((0, 0)), const)
    inv_cols = iltt_inverse_first_column(pre.block_first_columns())
    object.__setattr__(pre, "inv_cols", inv_cols)
    return pre


def _check(grid: SpaceTimeGrid, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.size,):
        raise ValueError(f"expected a vector of length N*J = {grid.size}, got shape {v.shape}")
    return v


def apply_A(op: AllAtOnceOperator, v: np.ndarray) -> np.ndarray:
    v = _check(op.grid, v)
    V = v.reshape(op.grid.J, op.grid.N)
    return (op.La.entries @ V + toeplitz_matvec_lower(op.T, V)).ravel()


def apply_A_transpose(op: AllAtOnceOperator, v: np.ndarray) -> np.ndarray:
    v = _check(op.grid, v)
    V = v.reshape(op.grid.J, op.grid.N)
    return (op.La.entries @ V + toeplitz_matvec_upper(op.T, V)).ravel()


def apply_Pr_inv(p: TwoSidedPreconditioner, v: np.ndarray) -> np.ndarray:
    v = _check(p.grid, v)
    w = apply_Q_kron_IN(p.grid, v).reshape(p.grid.J, p.grid.N)
    w /= p.sqrt_beta_lambda[:, None]
    return apply_Q_kron_IN(p.grid, w.ravel())


def _block_iltt(p: TwoSidedPreconditioner, W: np.ndarray, transpose: bool) -> np.ndarray:
    N = p.grid.N
    if N == 1:
        return W * p.inv_cols
    if transpose:
        W = W[:, ::-1]
    size = sfft.next_fast_len(2 * N - 1, real=True)
    out = sfft.irfft(sfft.rfft(W, n=size, axis=-1) * p.inv_spectrum(size), n=size, axis=-1)[:, :N]
    return out[:, ::-1] if transpose else out


def apply_Pl_inv(p: TwoSidedPreconditioner, v: np.ndarray) -> np.ndarray:
    """``(Q (x) I) blockdiag(T_i^{-1}) (Q (x) I) v``."""
    v = _check(p.grid, v)
    w = apply_Q_kron_IN(p.grid, v).reshape(p.grid.J, p.grid.N)
    w = _block_iltt(p, w, transpose=False)
    return apply_Q_kron_IN(p.grid, w.ravel())


def apply_Pl_inv_transpose(p: TwoSidedPreconditioner, v: np.ndarray) -> np.ndarray:
    v = _check(p.grid, v)
    w = apply_Q_kron_IN(p.grid, v).reshape(p.grid.J, p.grid.N)
    w = _block_iltt(p, w, transpose=True)
    return apply_Q_kron_IN(p.grid, w.ravel())


def apply_preconditioned(op: AllAtOnceOperator, p: TwoSidedPreconditioner, v: np.ndarray) -> np.ndarray:
    """``P_l^{-1} (A (P_r^{-1} v))``."""
    return apply_Pl_inv(p, apply_A(op, apply_Pr_inv(p, v)))


def apply_preconditioned_transpose(op: AllAtOnceOperator, p: TwoSidedPreconditioner, v: np.ndarray) -> np.ndarray:
    # P_r^{-1} is symmetric
    return apply_Pr_inv(p, apply_A_transpose(op, apply_Pl_inv_transpose(p, v)))


def direct_solve_constant(p: TwoSidedPreconditioner, f: np.ndarray) -> np.ndarray:
    """Exact solve of ``A u = f`` when ``a`` is the constant ``beta``: ``u = P_l^{-1} P_r^{-1} f``."""
    if p.coefficient_constant is None:
        raise ValueError("direct solver requires a constant coefficient field")
    if not math.isclose(p.coefficient_constant, p.beta, rel_tol=1e-14):
        raise ValueError(
            f"direct solver needs beta equal to the constant coefficient "
            f"({p.coefficient_constant}), got beta={p.beta}"
        )
    return apply_Pl_inv(p, apply_Pr_inv(p, f))
