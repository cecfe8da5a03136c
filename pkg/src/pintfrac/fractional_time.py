"""L1 time discretisation and lower-triangular Toeplitz arithmetic.

Vectors handled here may carry leading batch axes; every Toeplitz routine
acts along the last axis so that ``J`` independent time slices can be pushed
through one batched FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft

__all__ = [
    "L1Weights",
    "LowerTriangularToeplitz",
    "l1_weights",
    "build_time_matrix",
    "toeplitz_matvec_lower",
    "toeplitz_matvec_upper",
    "iltt_inverse_first_column",
    "caputo_quadrature",
    "WEIGHT_GENERATORS",
]


@dataclass(frozen=True)
class L1Weights:
    """Convolution-quadrature weights for the Caputo derivative.

    ``l[k]`` multiplies ``u^{n-k}`` and ``init_weight[n-1]`` multiplies the
    initial datum at step ``n``; both still need the ``tau**-alpha`` factor.
    """

    alpha: float
    l: np.ndarray
    init_weight: np.ndarray

    @property
    def n(self) -> int:
        return self.l.shape[0]


@dataclass(frozen=True)
class LowerTriangularToeplitz:
    """Lower-triangular Toeplitz matrix stored by its first column."""

    first_col: np.ndarray
    _spectrum: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        col = np.asarray(self.first_col, dtype=float)
        if col.ndim != 1 or col.size == 0:
            raise ValueError("first_col must be a non-empty 1-D array")
        object.__setattr__(self, "first_col", col)

    @property
    def n(self) -> int:
        return self.first_col.shape[0]

    @property
    def invertible(self) -> bool:
        return self.first_col[0] != 0.0

    def todense(self) -> np.ndarray:
        n = self.n
        idx = np.subtract.outer(np.arange(n), np.arange(n))
        return np.where(idx >= 0, self.first_col[np.clip(idx, 0, None)], 0.0)

    def spectrum(self, size: int) -> np.ndarray:
        """rFFT of the zero-padded first column, cached per FFT length."""
        fhat = self._spectrum.get(size)
        if fhat is None:
            fhat = sfft.rfft(self.first_col, n=size)
            self._spectrum[size] = fhat
        return fhat


def _l1_b(alpha: float, n: int) -> np.ndarray:
    j = np.arange(n, dtype=float)
    return ((j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)) / math.gamma(2.0 - alpha)


def l1_weights(alpha: float, N: int) -> L1Weights:
    """L1 weights for ``N`` steps of a Caputo derivative of order ``alpha``.

    With ``b_j = ((j+1)^(1-a) - j^(1-a)) / Gamma(2-a)`` the weights are
    ``l_0 = b_0``, ``l_j = b_j - b_{j-1}`` and the initial-data weight at step
    ``n`` is ``-b_{n-1}``.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    N = int(N)
    b = _l1_b(alpha, N)
    l = b.copy()
    l[1:] = b[1:] - b[:-1]
    return L1Weights(alpha=float(alpha), l=l, init_weight=-b)


# Pluggable quadrature registry; only L1 ships.
WEIGHT_GENERATORS: dict[str, Callable[[float, int], L1Weights]] = {"L1": l1_weights}


def build_time_matrix(w: L1Weights, tau: float) -> LowerTriangularToeplitz:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return LowerTriangularToeplitz(tau ** (-w.alpha) * w.l)


def caputo_quadrature(w: L1Weights, tau: float, u: np.ndarray, psi: float | np.ndarray = 0.0) -> np.ndarray:
    """Apply the discrete Caputo derivative to samples ``u[n-1] = u(n tau)``.

    Returns the approximations at ``t_1, ..., t_N`` (along the last axis).
    """
    u = np.asarray(u, dtype=float)
    T = build_time_matrix(w, tau)
    scale = tau ** (-w.alpha)
    return toeplitz_matvec_lower(T, u) + scale * np.multiply.outer(np.asarray(psi, dtype=float), w.init_weight)


def _fft_len(n: int) -> int:
    return sfft.next_fast_len(2 * n - 1, real=True)


def _check_len(t: LowerTriangularToeplitz, v: np.ndarray) -> None:
    if v.shape[-1] != t.n:
        raise ValueError(f"dimension mismatch: operator has n={t.n}, vector has {v.shape[-1]}")


def toeplitz_matvec_lower(t: LowerTriangularToeplitz, v: np.ndarray) -> np.ndarray:
    """``T v`` through a circulant embedding of length >= 2n-1."""
    v = np.asarray(v, dtype=float)
    _check_len(t, v)
    n = t.n
    if n == 1:
        return t.first_col[0] * v
    size = _fft_len(n)
    out = sfft.irfft(sfft.rfft(v, n=size, axis=-1) * t.spectrum(size), n=size, axis=-1)
    return out[..., :n]


def toeplitz_matvec_upper(t: LowerTriangularToeplitz, v: np.ndarray) -> np.ndarray:
    """``T^T v``; uses ``T^T = F T F`` with ``F`` the flip permutation."""
    v = np.asarray(v, dtype=float)
    _check_len(t, v)
    return toeplitz_matvec_lower(t, v[..., ::-1])[..., ::-1]


def _truncated_product(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    size = sfft.next_fast_len(a.shape[-1] + b.shape[-1] - 1, real=True)
    prod = sfft.irfft(sfft.rfft(a, n=size, axis=-1) * sfft.rfft(b, n=size, axis=-1), n=size, axis=-1)
    return prod[..., :n]


def iltt_inverse_first_column(t: LowerTriangularToeplitz | np.ndarray) -> np.ndarray:
    """First column of the inverse of an invertible lower-triangular Toeplitz matrix.

    The first column is read as a power series ``g(z)``; its reciprocal is
    obtained by Newton's iteration ``x <- x + x (1 - g x)``, which doubles the
    number of correct coefficients per sweep (O(n log n) overall).

    Accepts either a ``LowerTriangularToeplitz`` or a raw array of first
    columns of shape ``(..., n)``; in the latter case every row is inverted.
    """
    g = t.first_col if isinstance(t, LowerTriangularToeplitz) else np.asarray(t, dtype=float)
    if g.shape[-1] == 0:
        raise ValueError("empty first column")
    g0 = g[..., :1]
    if np.any(g0 == 0.0):
        raise ValueError("singular lower-triangular Toeplitz matrix (zero diagonal)")
    n = g.shape[-1]
    x = 1.0 / g0
    k = 1
    while k < n:
        k2 = min(2 * k, n)
        e = _truncated_product(g[..., :k2], x, k2)
        e[..., 0] -= 1.0
        # e = g x - 1 vanishes on its first k entries
        corr = _truncated_product(x, e[..., k:k2], k2 - k)
        x = np.concatenate([x, -corr], axis=-1)
        k = k2
    return x
