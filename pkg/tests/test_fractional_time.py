import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from pintfrac.fractional_time import (
    LowerTriangularToeplitz,
    build_time_matrix,
    caputo_quadrature,
    iltt_inverse_first_column,
    l1_weights,
    toeplitz_matvec_lower,
    toeplitz_matvec_upper,
)

ALPHAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def dense_lower(col):
    return sla.toeplitz(col, np.zeros(len(col)))


def rel(x, y):
    return np.linalg.norm(x - y) / np.linalg.norm(y)


class TestL1Weights:
    def test_single_step(self):
        w = l1_weights(0.5, 1)
        assert w.l == pytest.approx([2 / math.sqrt(math.pi)], rel=1e-14)
        assert w.l[0] == pytest.approx(1.1283791671, rel=1e-10)
        assert w.init_weight == pytest.approx([-2 / math.sqrt(math.pi)], rel=1e-14)

    def test_second_weight_closed_form(self):
        w = l1_weights(0.5, 2)
        assert w.l[1] == pytest.approx((math.sqrt(2) - 2) * 2 / math.sqrt(math.pi), rel=1e-14)
        assert w.l[1] == pytest.approx(-0.6609892126, abs=1e-10)

    def test_exact_on_linear_function(self):
        # the L1 scheme interpolates piecewise linearly, so u(t) = t is reproduced exactly
        alpha, N = 0.3, 8
        tau = 1.0 / N
        t = tau * np.arange(1, N + 1)
        got = caputo_quadrature(l1_weights(alpha, N), tau, t, psi=0.0)
        expect = t ** (1 - alpha) / math.gamma(2 - alpha)
        np.testing.assert_allclose(got, expect, rtol=1e-12)

    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("N", [1, 2, 13, 64])
    def test_sign_pattern_and_partial_sums(self, alpha, N):
        w = l1_weights(alpha, N)
        assert w.l[0] > 0
        assert np.all(w.l[1:] < 0)
        assert np.all(np.cumsum(w.l) > 0)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_constants_annihilated(self, alpha):
        N = 40
        w = l1_weights(alpha, N)
        for n in range(1, N + 1):
            assert w.l[:n].sum() + w.init_weight[n - 1] == pytest.approx(0.0, abs=1e-14)
        out = caputo_quadrature(w, 1.0 / N, np.full(N, 2.5), psi=2.5)
        assert np.abs(out).max() <= 1e-12 * 2.5

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_rejects_bad_alpha(self, alpha):
        with pytest.raises(ValueError):
            l1_weights(alpha, 4)

    def test_rejects_zero_steps(self):
        with pytest.raises(ValueError):
            l1_weights(0.5, 0)


class TestTimeMatrix:
    def test_unit_step(self):
        T = build_time_matrix(l1_weights(0.5, 1), 1.0)
        assert T.first_col == pytest.approx([2 / math.sqrt(math.pi)])

    def test_scaling(self):
        T = build_time_matrix(l1_weights(0.5, 2), 0.25)
        assert T.first_col[0] == pytest.approx(4 / math.sqrt(math.pi), rel=1e-14)
        assert T.first_col[0] == pytest.approx(2.2567583, abs=1e-7)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            build_time_matrix(l1_weights(0.5, 2), 0.0)

    def test_symmetric_part_positive_alpha_09(self):
        T = build_time_matrix(l1_weights(0.9, 16), 1 / 16).todense()
        assert np.linalg.eigvalsh(T + T.T).min() > 0

    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("N", [1, 5, 32, 64])
    def test_symmetric_part_positive(self, alpha, N):
        T = build_time_matrix(l1_weights(alpha, N), 1 / N).todense()
        assert np.linalg.eigvalsh(T + T.T).min() > 0

    def test_todense_is_lower_toeplitz(self):
        T = LowerTriangularToeplitz([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(T.todense(), [[3, 0, 0], [1, 3, 0], [2, 1, 3]])


class TestToeplitzMatvec:
    def test_identity(self):
        v = np.arange(1.0, 8.0)
        e = np.zeros(7)
        e[0] = 1
        np.testing.assert_allclose(toeplitz_matvec_lower(LowerTriangularToeplitz(e), v), v, atol=1e-14)
        np.testing.assert_allclose(toeplitz_matvec_upper(LowerTriangularToeplitz(e), v), v, atol=1e-14)

    def test_two_by_two(self):
        t = LowerTriangularToeplitz([1.0, -1.0])
        np.testing.assert_allclose(toeplitz_matvec_lower(t, [3.0, 5.0]), [3.0, 2.0], atol=1e-14)
        np.testing.assert_allclose(toeplitz_matvec_upper(t, [3.0, 5.0]), [-2.0, 5.0], atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 37, 100, 256, 512])
    def test_matches_dense(self, n):
        rng = np.random.default_rng(n)
        col, v = rng.standard_normal(n), rng.standard_normal(n)
        D = dense_lower(col)
        t = LowerTriangularToeplitz(col)
        assert rel(toeplitz_matvec_lower(t, v), D @ v) <= 1e-13
        assert rel(toeplitz_matvec_upper(t, v), D.T @ v) <= 1e-13

    def test_batched_rows(self):
        rng = np.random.default_rng(1)
        col, V = rng.standard_normal(9), rng.standard_normal((4, 9))
        D = dense_lower(col)
        np.testing.assert_allclose(toeplitz_matvec_lower(LowerTriangularToeplitz(col), V), V @ D.T, rtol=1e-12, atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            toeplitz_matvec_lower(LowerTriangularToeplitz([1.0, 2.0]), np.ones(3))
        with pytest.raises(ValueError):
            toeplitz_matvec_upper(LowerTriangularToeplitz([1.0, 2.0]), np.ones(3))


class TestILTTInverse:
    def test_scaled_identity(self):
        np.testing.assert_allclose(iltt_inverse_first_column(LowerTriangularToeplitz([2.0, 0, 0, 0])), [0.5, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("c", [0.5, -0.7, 1.3])
    def test_bidiagonal_geometric(self, c):
        n = 12
        col = np.zeros(n)
        col[:2] = [1.0, c]
        expect = (-c) ** np.arange(n)
        np.testing.assert_allclose(iltt_inverse_first_column(LowerTriangularToeplitz(col)), expect, rtol=1e-12)

    def test_matches_forward_substitution(self):
        rng = np.random.default_rng(64)
        n = 64
        col = rng.uniform(-1, 1, n) / (np.arange(n) + 1.0) ** 2
        col[0] = 1.0
        e1 = np.zeros(n)
        e1[0] = 1
        oracle = sla.solve_triangular(dense_lower(col), e1, lower=True)
        x = iltt_inverse_first_column(LowerTriangularToeplitz(col))
        assert rel(x, oracle) <= 1e-12
        assert rel(toeplitz_matvec_lower(LowerTriangularToeplitz(col), x), e1) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 17, 64, 257])
    def test_roundtrip_identity(self, n):
        rng = np.random.default_rng(n)
        T = build_time_matrix(l1_weights(0.5, n), 1.0 / n)
        Tinv = LowerTriangularToeplitz(iltt_inverse_first_column(T))
        v = rng.standard_normal(n)
        assert rel(toeplitz_matvec_lower(T, toeplitz_matvec_lower(Tinv, v)), v) <= 1e-10

    def test_batched(self):
        rng = np.random.default_rng(3)
        cols = rng.uniform(-0.2, 0.2, (5, 33))
        cols[:, 0] = rng.uniform(1, 2, 5)
        X = iltt_inverse_first_column(cols)
        for c, x in zip(cols, X):
            np.testing.assert_allclose(x, iltt_inverse_first_column(LowerTriangularToeplitz(c)), rtol=1e-13, atol=1e-15)

    def test_singular(self):
        with pytest.raises(ValueError):
            iltt_inverse_first_column(LowerTriangularToeplitz([0.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 200),
    alpha=st.floats(0.05, 0.95),
    shift=st.floats(0.0, 50.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_inverse_of_shifted_time_matrix(n, alpha, shift, seed):
    # blocks T_i = s^-1 T + s I in the preconditioner have this form
    T = build_time_matrix(l1_weights(alpha, n), 1.0 / n)
    G = LowerTriangularToeplitz(T.first_col + shift * np.eye(1, n).ravel())
    x = iltt_inverse_first_column(G)
    v = np.random.default_rng(seed).standard_normal(n)
    assert rel(toeplitz_matvec_lower(G, toeplitz_matvec_lower(LowerTriangularToeplitz(x), v)), v) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 512), seed=st.integers(0, 2**32 - 1))
def test_fft_matvec_agrees_with_dense(n, seed):
    rng = np.random.default_rng(seed)
    col, v = rng.standard_normal(n), rng.standard_normal(n)
    D = dense_lower(col)
    t = LowerTriangularToeplitz(col)
    assert rel(toeplitz_matvec_lower(t, v), D @ v) <= 1e-13
    assert rel(toeplitz_matvec_upper(t, v), D.T @ v) <= 1e-13
