"""Hybrid digital-analog joint source-channel coding toolkit.

Closed-form designs and mismatch distortions of HDA Costa and Wyner-Ziv
schemes, bandwidth-compression and broadcast power allocation, and two
empirical checks: a Gaussian Monte Carlo of the estimators and a
finite-blocklength random-codebook simulator.
"""

from .bandwidth import (
    BcAllocation,
    BroadcastPowers,
    RegionPoint,
    bc_mismatch_distortion,
    bc_optimal_power,
    broadcast_point,
    broadcast_region,
)
from .codebook import CodebookConfig, CodebookSimStats, build_codebook, decode, encode, simulate
from .core import (
    OBSERVATIONS,
    SCHEMES,
    CovariancePair,
    JointModel,
    LmmseResult,
    SchemeParams,
    build_joint_model,
    lmmse_solve,
)
from .designs import (
    CostaDesign,
    GenHdaDesign,
    ModifiedDesign,
    SuperimposedWzDesign,
    SuperpositionCostaDesign,
    WzDesign,
    combined_design,
    default_design,
    gen_hda_design,
    hda_costa_design,
    hda_wz_design,
    matched_optimum,
    modified_exponent_design,
    superimposed_wz_design,
    superposition_costa_design,
)
from .errors import (
    CodebookTooLargeError,
    ContractViolationError,
    HdaError,
    InfeasibleDesignError,
    InvalidCovarianceError,
    InvalidParameterError,
    UnsupportedConfigurationError,
)
from .mismatch import (
    MismatchReport,
    WzBounds,
    exponent_estimate,
    gen_hda_mismatch,
    mismatch_interference_distortion,
    mismatch_source_distortion,
    modified_mismatch_distortion,
    naive_analog_distortion,
    wz_mismatch_bounds,
)
from .montecarlo import McConfig, SimStats, mc_sweep, mc_validate
from .optimize import golden_section_minimize

__version__ = "0.1.0"
