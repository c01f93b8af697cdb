"""Schur-algorithm parametrization of discrete-time lossless transfer functions.

A lossless ``p x p`` function of McMillan degree ``n`` is handled through a
balanced realization whose realization matrix is unitary.  Interpolation
steps add or remove states; chaining them gives charts of the manifold of
such functions, with local coordinates made of interpolation values and the
logarithm of a constant unitary.
"""
from .atlas import (
    MembershipReport,
    MutualEncoding,
    PotapovFactorization,
    adapted_chart,
    adapted_chart_complex,
    adapted_chart_mutual,
    adapted_chart_real,
    chart_membership,
    chart_switch,
    mutual_decode,
    mutual_encode,
    omega_of_chart,
    potapov_factor_eval,
    potapov_factorize,
)
from .charts import (
    Chart,
    ChartCoordinates,
    make_chart,
    unitary_coord_count,
    unitary_coords,
    unitary_from_coords,
)
from .errors import (
    ConsistencyError,
    DimensionError,
    InadmissibleDataError,
    LosslessError,
    NotPositiveDefiniteError,
    NotStableError,
    OutOfDomainError,
    SingularEvaluationError,
)
from .fit import FitProblem, FitResult, fit, perturbed_start, sample_problem
from .jlossless import (
    JLosslessFactor,
    JLosslessReport,
    NudelmanData,
    equivariance_transform,
    h_constant,
    is_j_lossless,
    lft_apply,
    lft_matrix,
    phi_eval,
    random_admissible_data,
    sharp_eval,
    signature,
    theta_eval,
)
from .numcore import (
    OutputNormalPair,
    circle_quadrature_interpolant,
    hermitian_sqrt,
    is_positive_definite,
    random_output_normal_pair,
    random_unitary,
    solve_stein_sylvester,
    solve_stein_symmetric,
    spectral_radius,
)
from .schur import (
    BalancedRealization,
    RealizationReport,
    SchurStepRecord,
    analyze,
    backward_step,
    degree,
    eval_transfer,
    forward_step,
    interpolation_value,
    random_lossless,
    schur_algorithm,
    synthesize,
    synthesize_records,
    verify_realization,
)
from .tau import UnitaryPair, tau_map, tau_map_with_root, u_zero_completion, xy_blocks

__version__ = "0.1.0"
