"""Multiple-precision sparse Krylov solvers with ILU(0) preconditioning."""

from .ilu import (
    IdentityPreconditioner,
    Ilu0Preconditioner,
    IluFactors,
    NumericBreakdownError,
    PrecondMode,
    SingularPivotError,
    build_preconditioner,
    ilu0_apply,
    ilu0_apply_adjoint,
    ilu0_apply_adjoint_mixed,
    ilu0_apply_mixed,
    ilu0_factorize,
    ilu0_factorize_demoted,
)
from .multicomponent import MCComplex, MCFloat, Precision, renormalize, two_prod, two_sum
from .solvers import (
    METHODS,
    SolveReport,
    SolverConfig,
    bicg,
    bicgstab,
    cgs,
    gpbicg,
    solve,
)
from .sparse import (
    CooMatrix,
    CsrMatrix,
    DenseVector,
    MatrixMarketError,
    axpy,
    coo_to_csr,
    dot,
    hdot,
    norm2,
    parse_matrix_market,
    read_matrix_market,
    scale,
    spmv,
    spmv_adjoint,
    spmv_adjoint_mixed,
    spmv_mixed,
    vec_copy,
    vec_sub,
)

__version__ = "0.1.0"
