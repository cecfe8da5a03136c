"""Finite-difference Laplacians on uniform tensor grids and the sine transform
that diagonalises the constant-coefficient one.

Spatial unknowns are flattened row-major over ``(i_1, ..., i_d)`` with the
first dimension outermost; space-time vectors use ``j * N + n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp

__all__ = [
    "SpaceTimeGrid",
    "CoefficientField",
    "VariableLaplacian",
    "LaplacianEigen",
    "assemble_variable_laplacian",
    "assemble_constant_laplacian",
    "laplacian_eigenvalues",
    "fst_1d",
    "fst_nd",
    "apply_Q_kron_IN",
]


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform grid on a hyper-rectangle times ``N`` steps on ``(0, T_end]``.

    ``m[i]`` counts interior points, so ``h[i] = (upper - lower) / (m + 1)``.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    m: tuple[int, ...]
    N: int
    T_end: float = 1.0

    def __post_init__(self):
        lower = tuple(float(c) for c in self.lower)
        upper = tuple(float(c) for c in self.upper)
        m = tuple(int(k) for k in self.m)
        if not (1 <= len(m) <= 3) or len(lower) != len(m) or len(upper) != len(m):
            raise ValueError("grid needs matching lower/upper/m of dimension 1, 2 or 3")
        if any(k < 1 for k in m):
            raise ValueError(f"interior point counts must be >= 1, got {m}")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise ValueError("upper bounds must exceed lower bounds")
        if int(self.N) < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not self.T_end > 0:
            raise ValueError("T_end must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T_end", float(self.T_end))

    @classmethod
    def unit(cls, m: Sequence[int], N: int, T_end: float = 1.0, length: float = 1.0) -> "SpaceTimeGrid":
        d = len(m)
        return cls((0.0,) * d, (float(length),) * d, tuple(m), N, T_end)

    @property
    def dims(self) -> int:
        return len(self.m)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (k + 1) for lo, hi, k in zip(self.lower, self.upper, self.m))

    @property
    def tau(self) -> float:
        return self.T_end / self.N

    @property
    def J(self) -> int:
        return int(np.prod(self.m))

    @property
    def size(self) -> int:
        return self.N * self.J

    def axes(self) -> list[np.ndarray]:
        """Interior node coordinates per dimension."""
        return [lo + h * np.arange(1, k + 1) for lo, h, k in zip(self.lower, self.h, self.m)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def times(self) -> np.ndarray:
        return self.tau * np.arange(1, self.N + 1)


@dataclass(frozen=True)
class CoefficientField:
    """Diffusion coefficient ``a(x)`` with certified bounds ``a_min <= a <= a_max``.

    ``evaluator`` receives one coordinate array per dimension (broadcastable)
    and returns ``a`` at those points.
    """

    evaluator: Callable[..., np.ndarray]
    a_min: float
    a_max: float
    label: str = ""

    def __post_init__(self):
        if not (0 < self.a_min <= self.a_max):
            raise ValueError(f"need 0 < a_min <= a_max, got [{self.a_min}, {self.a_max}]")

    @classmethod
    def constant(cls, value: float) -> "CoefficientField":
        value = float(value)
        return cls(lambda *x: np.full(np.broadcast(*x).shape, value), value, value, label=f"const({value:g})")

    @property
    def is_constant(self) -> bool:
        return self.a_min == self.a_max

    def __call__(self, *x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.evaluator(*x), dtype=float), np.broadcast(*x).shape)


@dataclass(frozen=True)
class VariableLaplacian:
    grid: SpaceTimeGrid
    entries: sp.csr_matrix

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def todense(self) -> np.ndarray:
        return self.entries.toarray()


@dataclass(frozen=True)
class LaplacianEigen:
    grid: SpaceTimeGrid
    values: np.ndarray


def _half_point_samples(grid: SpaceTimeGrid, a: CoefficientField, axis: int) -> np.ndarray:
    """``a`` at ``x + h e_axis / 2`` for the nodes ``0..m_axis`` along ``axis``.

    Index ``k`` along ``axis`` is the half point between nodes ``k`` and
    ``k+1`` (node 0 being the lower boundary).
    """
    coords = grid.axes()
    lo, h, k = grid.lower[axis], grid.h[axis], grid.m[axis]
    coords[axis] = lo + h * (np.arange(k + 1) + 0.5)
    vals = a(*np.meshgrid(*coords, indexing="ij"))
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        bad = vals[~(np.isfinite(vals) & (vals > 0))].ravel()[0]
        raise ValueError(f"coefficient must be positive on the domain; sampled a = {bad!r}")
    tol = 1e-12 * max(1.0, a.a_max)
    if vals.min() < a.a_min - tol or vals.max() > a.a_max + tol:
        raise ValueError(
            f"coefficient samples [{vals.min():.6g}, {vals.max():.6g}] "
            f"violate the certified bounds [{a.a_min:.6g}, {a.a_max:.6g}]"
        )
    return vals


def assemble_variable_laplacian(grid: SpaceTimeGrid, a: CoefficientField) -> VariableLaplacian:
    """Central-difference ``-div(a grad)`` with homogeneous Dirichlet data.

    The flux between neighbours uses ``a`` sampled at their midpoint, which
    keeps the matrix symmetric and linear in ``a``.
    """
    m = grid.m
    J = grid.J
    diag = np.zeros(m)
    offsets, bands = [], []
    for axis in range(grid.dims):
        ah = _half_point_samples(grid, a, axis) / grid.h[axis] ** 2
        lo = [slice(None)] * grid.dims
        hi = [slice(None)] * grid.dims
        lo[axis] = slice(0, m[axis])
        hi[axis] = slice(1, m[axis] + 1)
        a_minus, a_plus = ah[tuple(lo)], ah[tuple(hi)]
        diag += a_minus + a_plus
        if m[axis] > 1:
            # coupling between node k and k+1 along axis; last node has no upper neighbour
            off = -a_plus.copy()
            last = [slice(None)] * grid.dims
            last[axis] = m[axis] - 1
            off[tuple(last)] = 0.0
            stride = int(np.prod(m[axis + 1:]))
            band = off.ravel()[: J - stride]
            offsets += [stride, -stride]
            bands += [band, band]
    entries = sp.diags([diag.ravel()] + bands, [0] + offsets, shape=(J, J), format="csr")
    entries.sort_indices()
    return VariableLaplacian(grid, entries)


def assemble_constant_laplacian(grid: SpaceTimeGrid) -> VariableLaplacian:
    """``L_1 = sum_i I (x) h_i^-2 W_{m_i} (x) I`` as a sparse Kronecker sum."""
    J = grid.J
    total = sp.csr_matrix((J, J))
    for axis, (k, h) in enumerate(zip(grid.m, grid.h)):
        W = sp.diags([-np.ones(k - 1), 2 * np.ones(k), -np.ones(k - 1)], [-1, 0, 1], shape=(k, k))
        left = sp.identity(int(np.prod(grid.m[:axis])))
        right = sp.identity(int(np.prod(grid.m[axis + 1:])))
        total = total + sp.kron(sp.kron(left, W / h**2), right)
    total = sp.csr_matrix(total)
    total.sort_indices()
    return VariableLaplacian(grid, total)


def laplacian_eigenvalues(grid: SpaceTimeGrid) -> LaplacianEigen:
    """Eigenvalues of ``L_1`` ordered like the flattened sine-transform modes."""
    lam = np.zeros(grid.m)
    for axis, (k, h) in enumerate(zip(grid.m, grid.h)):
        i = np.arange(1, k + 1)
        d = 4.0 * np.sin(i * np.pi / (2 * (k + 1))) ** 2 / h**2
        shape = [1] * grid.dims
        shape[axis] = k
        lam = lam + d.reshape(shape)
    return LaplacianEigen(grid, lam.ravel())


def fst_1d(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Orthonormal sine transform ``S_m v`` along ``axis``.

    ``S_m = sqrt(2/(m+1)) [sin(i j pi / (m+1))]``; evaluated as the FFT of the
    odd extension ``[0, v, 0, -reverse(v)]`` of length ``2(m+1)``.  ``S_m`` is
    symmetric and orthogonal, hence its own inverse.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[axis] == 0:
        raise ValueError("fst_1d needs a non-empty vector")
    v = np.moveaxis(v, axis, -1)
    m = v.shape[-1]
    ext = np.zeros(v.shape[:-1] + (2 * (m + 1),))
    ext[..., 1 : m + 1] = v
    ext[..., m + 2 :] = -v[..., ::-1]
    # imaginary part of the DFT of the odd extension is -2 * sum v_j sin(pi j k / (m+1))
    fhat = sfft.rfft(ext, axis=-1)[..., 1 : m + 1].imag
    out = -np.sqrt(0.5 / (m + 1)) * fhat
    return np.moveaxis(out, -1, axis)


def fst_nd(v: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    for ax in axes:
        v = fst_1d(v, axis=ax)
    return v


def apply_Q_kron_IN(grid: SpaceTimeGrid, v: np.ndarray) -> np.ndarray:
    """``(Q (x) I_N) v`` for a space-outer/time-inner vector of length ``N J``."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != grid.size:
        raise ValueError(f"expected length {grid.size}, got {v.shape[-1]}")
    lead = v.shape[:-1]
    block = v.reshape(lead + grid.m + (grid.N,))
    axes = range(len(lead), len(lead) + grid.dims)
    return fst_nd(block, axes).reshape(v.shape)
