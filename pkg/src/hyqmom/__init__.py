"""Hyperbolic quadrature-based moment closure for 1-D free-transport kinetics."""

from .backend import backend_name
from .closure import (
    ClosureResult,
    assemble_characteristic,
    check_constraints,
    gamma_family_alpha_n2,
    gamma_family_close_n2,
    hyqmom_close,
    hyqmom_close_general,
    interlacing_check,
    qmom_close,
    verify_factorization_fd,
)
from .moments import (
    Realizability,
    RealizabilityReport,
    StandardizedState,
    apply_functional,
    classify_realizability,
    gaussian_standardized_moments,
    hankel_determinants,
    maxwellian_moments,
    raw_to_standardized,
    standardized_to_raw,
)
from .orthopoly import (
    JacobiMatrix,
    Quadrature,
    RecurrenceCoefficients,
    build_q_polynomials,
    chebyshev,
    coefficients_to_raw,
    coefficients_to_standardized,
    gauss_quadrature,
    jacobi_matrix,
    reverse_chebyshev,
    tridiagonal_eigen,
)
from .riemann import RiemannSetup, exact_moments
from .solver import (
    SolverConfig,
    SolverGrid,
    advance,
    error_norms,
    hll_flux,
    initialize,
    run,
    wave_speeds,
)

__version__ = "0.1.0"
