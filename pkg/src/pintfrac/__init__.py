"""Two-sided parallel-in-time preconditioning for all-at-once systems of
L1-discretised time-fractional diffusion with variable coefficients."""

from .allatonce import (
    AllAtOnceOperator,
    TwoSidedPreconditioner,
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
from .fractional_time import (
    L1Weights,
    LowerTriangularToeplitz,
    build_time_matrix,
    iltt_inverse_first_column,
    l1_weights,
    toeplitz_matvec_lower,
    toeplitz_matvec_upper,
)
from .krylov import SolveReport, SolverConfig, gmres_restarted, ncg
from .problems import (
    METHODS,
    ProblemDefinition,
    RunResult,
    assemble_rhs,
    condition_number_report,
    example1,
    example2,
    example3,
    make_grid,
    permute_time_space,
    solve_problem,
)
from .spatial import (
    CoefficientField,
    LaplacianEigen,
    SpaceTimeGrid,
    VariableLaplacian,
    apply_Q_kron_IN,
    assemble_constant_laplacian,
    assemble_variable_laplacian,
    fst_1d,
    laplacian_eigenvalues,
)

__version__ = "0.1.0"
