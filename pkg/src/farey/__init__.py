"""Exact and grid numerics for the Farey map: interval pullbacks,
digit-sum level sets, Stern-Brocot constructions, the mu-transfer
operator, and renewal-theoretic asymptotics checks.

The package favors exact rational arithmetic (GMP-backed) wherever a
quantity is rational, and documents explicit error budgets everywhere
floats enter. All public entry points are deterministic, including the
multi-process enumeration paths.
"""

from .exact import (
    CapacityError,
    DomainError,
    FareyError,
    InfiniteMeasureError,
    Interval,
    IntervalSet,
    NoReturnWithinCapError,
    Rational,
    TerminalPointError,
    format_rational,
    interval_lambda,
    interval_mu,
    parse_rational,
    rational,
    set_normalize,
)
from .maps import (
    Branch,
    CFWord,
    cf_decode,
    cf_encode,
    cf_partial_sums,
    farey_cf_step,
    farey_forward,
    farey_orbit,
    gauss_forward,
    inverse_branch_images,
    psi_left,
    psi_right,
    return_cell,
    return_cells,
    return_time,
    sum_level_membership,
)
from .sternbrocot import (
    SternBrocotLevel,
    sb_generate,
    sumlevel_intervals_sb,
    sumlevel_lambda_sb,
    unimodular_check,
)
from .preimage import (
    MeasureReport,
    PreimageQuery,
    exact_level_measures,
    integrate_over_preimage,
    preimage_measure,
    preimage_set,
    sumlevel_intervals_cf,
)
from .transfer import (
    GridContext,
    GridFunction,
    LevelMeasureSeries,
    MeshError,
    TransferGrid,
    build_mesh,
    cesaro_average,
    cesaro_deviation,
    cesaro_deviation_profile,
    duality_check,
    get_default_context,
    get_laws_context,
    laplace_pointwise_deviation,
    sumlevel_measure_grid,
    transfer_apply_grid,
    transfer_apply_pointwise,
    transfer_iterate_exact,
    transfer_iterate_grid,
    transfer_phi_values_exact,
)
from .asymptotic import (
    FitReport,
    IdentityReport,
    KernelWeights,
    convolution_telescope_gap,
    growth_verdict,
    interval_law_fit,
    laplace_law_fit,
    log_kernel_constant,
    log_kernel_constant_pieces,
    partial_sum_law_fit,
    remainder_scaled,
    renewal_identity_check,
    renewal_identity_gap,
    renewal_lambda_deviation,
    renewal_lambda_integral,
    renewal_lambda_series,
    renewal_mu_deviation,
    renewal_mu_integral,
    renewal_mu_series,
)

__version__ = "1.0.0"
