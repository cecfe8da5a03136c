import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pintfrac.allatonce import (
    AllAtOnceOperator,
    apply_A,
    apply_A_transpose,
    apply_Pl_inv,
    apply_Pl_inv_transpose,
    apply_Pr_inv,
    apply_preconditioned,
    apply_preconditioned_transpose,
    build_preconditioner,
    direct_solve_constant,
)
from pintfrac.dense_oracle import dense_assemble_all
from pintfrac.fractional_time import build_time_matrix, l1_weights, toeplitz_matvec_lower, LowerTriangularToeplitz
from pintfrac.spatial import CoefficientField, SpaceTimeGrid, assemble_variable_laplacian, laplacian_eigenvalues
from pintfrac.verification import random_smooth_coefficient


def rel(x, y):
    return np.linalg.norm(x - y) / np.linalg.norm(y)


def setup(m, N, a, alpha=0.5):
    grid = SpaceTimeGrid.unit(m, N)
    T = build_time_matrix(l1_weights(alpha, N), grid.tau)
    op = AllAtOnceOperator(assemble_variable_laplacian(grid, a), T, grid)
    return grid, T, op, build_preconditioner(grid, T, a)


EX2 = CoefficientField(lambda x, y: 40 + x**3.5 + y**3.5, 40.0, 42.0)


class TestApplyA:
    def test_single_step(self):
        grid, T, op, _ = setup((4,), 1, CoefficientField.constant(3.0))
        v = np.random.default_rng(0).standard_normal(grid.size)
        expect = op.La.matvec(v) + T.first_col[0] * v
        np.testing.assert_allclose(apply_A(op, v), expect, rtol=1e-14)
        np.testing.assert_allclose(apply_A_transpose(op, v), expect, rtol=1e-14)

    def test_basis_columns_small(self):
        grid, T, op, _ = setup((2,), 2, CoefficientField.constant(1.0))
        A = dense_assemble_all(grid, CoefficientField.constant(1.0), T).A
        for k in range(4):
            e = np.eye(4)[k]
            np.testing.assert_allclose(apply_A(op, e), A[:, k], rtol=1e-13, atol=1e-13)

    def test_ex2_coefficient_random(self):
        grid, T, op, _ = setup((3, 3), 4, EX2)
        dense = dense_assemble_all(grid, EX2, T)
        v = np.random.default_rng(1).standard_normal(grid.size)
        assert rel(apply_A(op, v), dense.A @ v) <= 1e-12
        assert rel(apply_A_transpose(op, v), dense.A.T @ v) <= 1e-12

    def test_adjoint_identity(self):
        rng = np.random.default_rng(2)
        a = random_smooth_coefficient(rng, 2)
        grid, T, op, _ = setup((5, 4), 7, a)
        v, w = rng.standard_normal((2, grid.size))
        assert np.dot(apply_A(op, v), w) == pytest.approx(np.dot(v, apply_A_transpose(op, w)), rel=1e-12)

    def test_dimension_mismatch(self):
        grid, T, op, pre = setup((3,), 2, CoefficientField.constant(1.0))
        for fn in (lambda v: apply_A(op, v), lambda v: apply_A_transpose(op, v), lambda v: apply_Pr_inv(pre, v),
                   lambda v: apply_Pl_inv(pre, v), lambda v: apply_Pl_inv_transpose(pre, v)):
            with pytest.raises(ValueError):
                fn(np.ones(5))

    def test_operator_shape_check(self):
        grid = SpaceTimeGrid.unit((3,), 2)
        La = assemble_variable_laplacian(grid, CoefficientField.constant(1.0))
        with pytest.raises(ValueError):
            AllAtOnceOperator(La, build_time_matrix(l1_weights(0.5, 3), 0.5), grid)


class TestPreconditioner:
    def test_beta_is_geometric_mean(self):
        _, _, _, pre = setup((3, 3), 2, EX2)
        assert pre.beta == pytest.approx(np.sqrt(40 * 42))
        assert 40 <= pre.beta <= 42

    def test_block_inverse_columns(self):
        _, T, _, pre = setup((4, 3), 9, EX2)
        cols = pre.block_first_columns()
        assert np.all(cols[:, 0] > 0)
        e1 = np.eye(1, 9).ravel()
        for c, x in zip(cols, pre.inv_cols):
            assert rel(toeplitz_matvec_lower(LowerTriangularToeplitz(c), x), e1) <= 1e-12

    def test_scalar_case_Pr(self):
        a = CoefficientField.constant(2.0)
        grid, T, op, pre = setup((1,), 1, a)
        lam = laplacian_eigenvalues(grid).values[0]
        v = np.array([3.0])
        np.testing.assert_allclose(apply_Pr_inv(pre, v), v / np.sqrt(2.0 * lam), rtol=1e-14)

    def test_scalar_case_Pl(self):
        a = CoefficientField.constant(2.0)
        grid, T, op, pre = setup((1,), 1, a)
        s = np.sqrt(2.0 * laplacian_eigenvalues(grid).values[0])
        v = np.array([3.0])
        np.testing.assert_allclose(apply_Pl_inv(pre, v), v / (T.first_col[0] / s + s), rtol=1e-14)
        np.testing.assert_allclose(apply_Pl_inv_transpose(pre, v), apply_Pl_inv(pre, v), rtol=1e-15)

    def test_Pr_squared_inverts_beta_L1(self):
        grid, T, op, pre = setup((4, 3), 3, EX2)
        dense = dense_assemble_all(grid, EX2, T)
        v = np.random.default_rng(3).standard_normal(grid.size)
        back = np.kron(pre.beta * dense.L_1, np.eye(3)) @ apply_Pr_inv(pre, apply_Pr_inv(pre, v))
        assert rel(back, v) <= 1e-12

    def test_Pr_symmetric(self):
        grid, T, op, pre = setup((3, 5), 4, EX2)
        v, w = np.random.default_rng(4).standard_normal((2, grid.size))
        assert np.dot(apply_Pr_inv(pre, v), w) == pytest.approx(np.dot(v, apply_Pr_inv(pre, w)), rel=1e-12)

    def test_Pl_inverts_dense_Pl(self):
        grid, T, op, pre = setup((3, 4), 5, EX2)
        dense = dense_assemble_all(grid, EX2, T)
        v = np.random.default_rng(5).standard_normal(grid.size)
        assert rel(apply_Pl_inv(pre, dense.P_l @ v), v) <= 1e-12
        assert rel(apply_Pl_inv_transpose(pre, dense.P_l.T @ v), v) <= 1e-12

    def test_Pl_adjoint(self):
        grid, T, op, pre = setup((4, 2), 6, EX2)
        v, w = np.random.default_rng(6).standard_normal((2, grid.size))
        lhs = np.dot(apply_Pl_inv(pre, v), w)
        assert lhs == pytest.approx(np.dot(v, apply_Pl_inv_transpose(pre, w)), rel=1e-12)

    def test_N1_transpose_equals_forward(self):
        grid, T, op, pre = setup((4, 3), 1, EX2)
        v = np.random.default_rng(7).standard_normal(grid.size)
        np.testing.assert_allclose(apply_Pl_inv_transpose(pre, v), apply_Pl_inv(pre, v), rtol=1e-13)

    def test_preconditioned_matches_dense(self):
        rng = np.random.default_rng(8)
        a = random_smooth_coefficient(rng, 2)
        grid, T, op, pre = setup((3, 4), 5, a, alpha=0.9)
        dense = dense_assemble_all(grid, a, T)
        M = dense.preconditioned()
        v = rng.standard_normal(grid.size)
        assert rel(apply_preconditioned(op, pre, v), M @ v) <= 1e-12
        assert rel(apply_preconditioned_transpose(op, pre, v), M.T @ v) <= 1e-12

    def test_preconditioned_singular_values_bracket(self):
        rng = np.random.default_rng(9)
        a = random_smooth_coefficient(rng, 2, contrast=3.0)
        grid, T, op, pre = setup((4, 4), 4, a, alpha=0.1)
        s = np.linalg.svd(dense_assemble_all(grid, a, T).preconditioned(), compute_uv=False)
        bound = a.a_max / a.a_min
        assert s[0] / s[-1] <= bound + 1e-8
        assert np.sqrt(1 / bound) - 1e-8 <= s[-1] and s[0] <= np.sqrt(bound) + 1e-8


class TestConstantCoefficient:
    @pytest.mark.parametrize("m,N", [((1,), 1), ((6,), 5), ((5, 7), 8), ((3, 4, 5), 4)])
    def test_preconditioned_is_identity(self, m, N):
        grid, T, op, pre = setup(m, N, CoefficientField.constant(1.7))
        v = np.random.default_rng(N).standard_normal(grid.size)
        assert rel(apply_preconditioned(op, pre, v), v) <= 1e-10

    def test_scalar_direct_solve(self):
        grid, T, op, pre = setup((1,), 1, CoefficientField.constant(1.0))
        f = np.array([2.0])
        u = direct_solve_constant(pre, f)
        assert u[0] * (op.La.entries[0, 0] + T.first_col[0]) == pytest.approx(2.0, rel=1e-14)

    def test_direct_solve_matches_dense(self):
        a = CoefficientField.constant(1.0)
        grid, T, op, pre = setup((3, 3), 4, a)
        A = dense_assemble_all(grid, a, T).A
        f = np.random.default_rng(10).standard_normal(grid.size)
        u = direct_solve_constant(pre, f)
        assert rel(u, np.linalg.solve(A, f)) <= 1e-12
        assert np.linalg.norm(f - apply_A(op, u)) / np.linalg.norm(f) <= 1e-10

    def test_direct_solve_rejects_variable(self):
        _, _, _, pre = setup((3, 3), 2, EX2)
        with pytest.raises(ValueError, match="constant"):
            direct_solve_constant(pre, np.ones(18))

    def test_direct_solve_rejects_mismatched_beta(self):
        grid = SpaceTimeGrid.unit((3,), 2)
        T = build_time_matrix(l1_weights(0.5, 2), 0.5)
        pre = build_preconditioner(grid, T, CoefficientField.constant(1.0), beta=2.0)
        with pytest.raises(ValueError, match="beta"):
            direct_solve_constant(pre, np.ones(6))

    def test_dense_Pr_Pl_product(self):
        a = CoefficientField.constant(2.5)
        grid, T, op, pre = setup((3, 2), 3, a)
        d = dense_assemble_all(grid, a, T)
        np.testing.assert_allclose(d.P_r @ d.P_l, d.A, rtol=1e-12, atol=1e-12 * np.abs(d.A).max())


@settings(max_examples=25, deadline=None)
@given(
    m=st.lists(st.integers(1, 5), min_size=1, max_size=2),
    N=st.integers(1, 8),
    alpha=st.sampled_from([0.1, 0.5, 0.9]),
    seed=st.integers(0, 2**32 - 1),
)
def test_fast_applies_match_dense(m, N, alpha, seed):
    rng = np.random.default_rng(seed)
    a = random_smooth_coefficient(rng, len(m))
    grid, T, op, pre = setup(tuple(m), N, a, alpha)
    d = dense_assemble_all(grid, a, T)
    v = rng.standard_normal(grid.size)
    assert rel(apply_A(op, v), d.A @ v) <= 1e-12
    assert rel(apply_Pr_inv(pre, v), np.linalg.solve(d.P_r, v)) <= 1e-12
    assert rel(apply_Pl_inv(pre, v), np.linalg.solve(d.P_l, v)) <= 1e-12
    assert rel(apply_Pl_inv_transpose(pre, v), np.linalg.solve(d.P_l.T, v)) <= 1e-12
