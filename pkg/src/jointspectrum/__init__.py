"""Numerical laboratory for joint spectra of finite sets of unimodular matrices.

Layers, bottom up: exact projections and proximality classification
(``linalg``), support-function convex bodies (``geometry``), product-set
enumeration with convergence diagnostics (``enumeration``), joint-spectral-
radius branch and bound (``jsr``), Monte Carlo random-walk statistics
(``walks``), scikit-learn-style drivers (``estimators``), and flat-file
plumbing plus the ``jspec`` command line (``io``, ``cli``).
"""

__version__ = "0.1.0"

from .enumeration import (
    MatrixSet,
    SpectrumEstimate,
    append_word,
    cone_invariance_check,
    enumerate_products,
    joint_spectrum_estimate,
    matrix_set,
    product_mode,
)
from .errors import (
    BadIndex,
    BadResolution,
    DegenerateBody,
    DimMismatch,
    DirsetMismatch,
    EmptyInput,
    JointSpectrumError,
    NumericalFailure,
    ParseError,
    SingularInput,
)
from .estimators import (
    ExceedanceDecay,
    JointSpectralRadius,
    JointSpectrumEstimator,
    LogMgfEstimator,
    LyapunovVectorEstimator,
    RateFunctionEstimator,
)
from .geometry import (
    DirectionSet,
    SupportBody,
    asymptotic_cone,
    body_from_points,
    contains,
    hausdorff_distance,
    interior_margin,
    make_directions,
    merge_bodies,
)
from .jsr import JsrBounds, berger_wang_check, jsr_bounds, weight_direction
from .linalg import (
    ChamberVector,
    ProximalityReport,
    UnimodularMatrix,
    cartan_projection,
    exterior_power,
    is_loxodromic,
    jordan_projection,
    normalize_det,
    proximality_report,
)
from .walks import (
    MgfEstimate,
    RateGrid,
    WalkConfig,
    additivity_defect_stats,
    ams_loxodromy_search,
    default_thetas,
    ldp_decay_fit,
    legendre_transform,
    log_mgf_estimate,
    lyapunov_estimate,
    rate_function_estimate,
    run_walk,
    sample_projections,
    word_kappa,
)

__all__ = [
    "__version__",
    "BadIndex",
    "BadResolution",
    "ChamberVector",
    "DegenerateBody",
    "DimMismatch",
    "DirectionSet",
    "DirsetMismatch",
    "EmptyInput",
    "ExceedanceDecay",
    "JointSpectralRadius",
    "JointSpectrumError",
    "JointSpectrumEstimator",
    "JsrBounds",
    "LogMgfEstimator",
    "LyapunovVectorEstimator",
    "MatrixSet",
    "MgfEstimate",
    "NumericalFailure",
    "ParseError",
    "ProximalityReport",
    "RateFunctionEstimator",
    "RateGrid",
    "SingularInput",
    "SpectrumEstimate",
    "SupportBody",
    "UnimodularMatrix",
    "WalkConfig",
    "additivity_defect_stats",
    "ams_loxodromy_search",
    "append_word",
    "asymptotic_cone",
    "berger_wang_check",
    "body_from_points",
    "cartan_projection",
    "cone_invariance_check",
    "contains",
    "default_thetas",
    "enumerate_products",
    "exterior_power",
    "hausdorff_distance",
    "interior_margin",
    "is_loxodromic",
    "joint_spectrum_estimate",
    "jordan_projection",
    "jsr_bounds",
    "ldp_decay_fit",
    "legendre_transform",
    "log_mgf_estimate",
    "lyapunov_estimate",
    "make_directions",
    "matrix_set",
    "merge_bodies",
    "normalize_det",
    "product_mode",
    "proximality_report",
    "rate_function_estimate",
    "run_walk",
    "sample_projections",
    "weight_direction",
    "word_kappa",
]
