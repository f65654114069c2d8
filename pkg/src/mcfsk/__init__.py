"""Stochastic kriging with Markovian covariance functions.

Markovian covariance functions ``k(x, y) = p(min(x, y)) q(max(x, y))``
have tridiagonal inverses with closed-form entries.  This package builds
them, extends them to lattices through Kronecker products, and uses the
resulting sparse precisions for likelihood evaluation, fitting and
prediction under simulation noise.
"""

from .errors import (
    ConsistencyError,
    DomainError,
    FitError,
    InputError,
    MCFError,
    NearSingularError,
    NotPositiveDefiniteError,
    NumericalError,
    ParameterError,
    SolverError,
)
from .covariance import (
    CovMatrixDense,
    Mcf1d,
    TridiagPrecision,
    brownian_bridge,
    brownian_motion,
    build_cov,
    det_cov,
    eval_mcf,
    exponential,
    offdiag_minor,
    ornstein_uhlenbeck,
    precision,
    transform_mcf,
    validate_mcf,
)
from .greens import (
    GreensFamily,
    ToeplitzParams,
    closed_precision,
    closed_precision_params,
    from_toeplitz,
    greens_mcf,
    to_toeplitz,
)
from .lattice import (
    KronPrecision,
    LatticeDesign,
    SeparableMcf,
    build_lattice,
    kron_eigendata,
    kron_matvec,
    kron_precision,
    sep_cov_eval,
)
from .linalg import (
    NoiseDiag,
    ToeplitzEig,
    WoodburySolver,
    assemble_woodbury,
    condition_number,
    sine_transform_apply,
    toeplitz_eig,
    tridiag_solve,
)
from .kriging import (
    Dataset,
    FittedSk,
    TrendBasis,
    fit_general,
    fit_toeplitz,
    load_model,
    loglik,
    predict,
    predict_batch,
    save_model,
    srmse,
)

__version__ = "0.1.0"
