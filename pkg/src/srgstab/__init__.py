"""Frequency-domain stability certification for converter-grid systems via
scaled relative graphs (SRGs), with classical criteria for comparison."""

__version__ = "0.1.0"

from .cpl import (
    CplDomainError,
    CplParams,
    RippleSpec,
    cpl_current,
    cpl_disk,
    cpl_harmonic_split,
    cpl_srg_sample,
    epsilon_rho,
)
from .criteria import (
    CertificationReport,
    ComparisonTable,
    CscrResult,
    GridTooCoarseError,
    SrgOptions,
    certify_linear,
    certify_with_cpl,
    compare_criteria,
    critical_scr,
    gnc_check,
    margin_profile,
    passivity_check,
    small_gain_check,
    small_phase_check,
)
from .gridmodels import (
    Branch,
    FrequencyDataSet,
    NetworkCase,
    NetworkError,
    RlGridParams,
    Shunt,
    kron_reduce,
    kron_reduced_admittance,
    load_frequency_data,
    rl_grid_model,
    rotate_admittance,
    save_frequency_data,
    scr_value,
    sum_admittances,
)
from .lti import (
    EvaluationError,
    FrequencyGrid,
    InverseModel,
    NearSingularError,
    RationalModel,
    RotatedModel,
    SampledModel,
    StateSpaceModel,
    evaluate,
    invert_at,
    is_rh_infinity,
    rotation_matrix,
)
from .modelio import ModelFormatError, load_model, load_network
from .srg import (
    Disk,
    InversionSingularityError,
    SrgRegion,
    TauSweep,
    boundary_hausdorff,
    default_tau_grid,
    min_distance_over_tau,
    minkowski_sum_disk,
    mobius_invert,
    points_in_region,
    positive_real_reach,
    region_distance,
    srg_of_matrix,
    srg_sample_oracle,
    tau_swept_region,
)
