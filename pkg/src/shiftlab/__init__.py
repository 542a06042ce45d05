"""Numerical laboratory for bilateral weighted shifts and their dynamics.

The package has three layers. ``shifts`` holds the exact weight-sequence
algebra for eventually constant bilateral shifts: canonical forms,
spectral annuli, hyperbolic-type classification, and the mean-transform
weight update with its closed-form deep iterates. ``linalg`` and
``dynamics`` provide the certified dense backend and the orbit machinery
(homoclinic certificates, pseudo-orbits, shadowing). ``experiments`` and
``cli`` wrap everything into config-driven, byte-deterministic runs.
"""

from .errors import (
    ConfigInvalidError,
    ConstantWeightsError,
    DeltaTooLargeError,
    HorizonTooLargeError,
    NonConvergenceError,
    NotBoundedOrbitError,
    NotHyperbolicError,
    NotHyponormalError,
    NotPSDError,
    ShiftLabError,
    SingularInputError,
    TraceDivergedError,
    UnboundedConjugatorError,
    WindowTooLargeError,
)
from .linalg import (
    MAX_DIM,
    ComplexMatrix,
    PolarFactors,
    SchurForm,
    SpectralSplit,
    gelfand_radius,
    is_hyperbolic_matrix,
    operator_norm,
    polar_decompose,
    psd_power,
    schur_decompose,
    sort_spectrum,
    spectral_split,
    spectrum_distance,
    svd,
)
from .shifts import (
    MAX_ALUTHGE_POWER,
    PRESET_SHIFTS,
    IndexSplit,
    ShiftClass,
    ShiftOperator,
    SpectralAnnulus,
    Verdict,
    WeightSequence,
    aluthge_weights,
    aluthge_weights_iterate,
    classify,
    diagonal_conjugate,
    inverse_shift_weights,
    is_hyponormal,
    log_binomial_weight,
    shift_distance,
    shift_library,
    spectrum_annulus,
    truncate_to_dense,
    weight_at,
)
from .dynamics import (
    MAX_HORIZON_DENSE,
    MAX_HORIZON_SHIFT,
    EcReport,
    HomoclinicReport,
    LatticeVector,
    OrbitSegment,
    PseudoOrbit,
    ShadowResult,
    apply_shift,
    build_pseudo_orbit_from_bounded,
    driven_pseudo_orbit,
    ec_membership,
    homoclinic_scaling_check,
    is_r_homoclinic,
    orbit_norms,
    shadow_solve,
    shadowing_constant_estimate,
)
from .aluthge import (
    AluthgeTrace,
    DivergenceCertificate,
    HyperbolicProbeReport,
    HyponormalDivergenceReport,
    aluthge_dense,
    divergence_certificate_shift,
    hyperbolic_limit_probe,
    hyponormal_divergence_check,
    iterate_dense,
    trace_for_shift,
)
from .experiments import ExperimentConfig, ResultTable, run, run_preset
from ._version import __version__

__all__ = [
    "MAX_ALUTHGE_POWER",
    "MAX_DIM",
    "MAX_HORIZON_DENSE",
    "MAX_HORIZON_SHIFT",
    "AluthgeTrace",
    "ComplexMatrix",
    "ConfigInvalidError",
    "ConstantWeightsError",
    "DeltaTooLargeError",
    "DivergenceCertificate",
    "EcReport",
    "ExperimentConfig",
    "HomoclinicReport",
    "HorizonTooLargeError",
    "HyperbolicProbeReport",
    "HyponormalDivergenceReport",
    "IndexSplit",
    "LatticeVector",
    "NonConvergenceError",
    "NotBoundedOrbitError",
    "NotHyperbolicError",
    "NotHyponormalError",
    "NotPSDError",
    "OrbitSegment",
    "PolarFactors",
    "PRESET_SHIFTS",
    "PseudoOrbit",
    "ResultTable",
    "SchurForm",
    "ShadowResult",
    "ShiftClass",
    "ShiftLabError",
    "ShiftOperator",
    "SingularInputError",
    "SpectralAnnulus",
    "SpectralSplit",
    "TraceDivergedError",
    "UnboundedConjugatorError",
    "Verdict",
    "WeightSequence",
    "WindowTooLargeError",
    "aluthge_dense",
    "aluthge_weights",
    "aluthge_weights_iterate",
    "apply_shift",
    "build_pseudo_orbit_from_bounded",
    "classify",
    "diagonal_conjugate",
    "divergence_certificate_shift",
    "driven_pseudo_orbit",
    "ec_membership",
    "gelfand_radius",
    "homoclinic_scaling_check",
    "hyperbolic_limit_probe",
    "hyponormal_divergence_check",
    "inverse_shift_weights",
    "is_hyperbolic_matrix",
    "is_hyponormal",
    "is_r_homoclinic",
    "iterate_dense",
    "log_binomial_weight",
    "operator_norm",
    "orbit_norms",
    "polar_decompose",
    "psd_power",
    "run",
    "run_preset",
    "schur_decompose",
    "shadow_solve",
    "shadowing_constant_estimate",
    "shift_distance",
    "shift_library",
    "sort_spectrum",
    "spectral_split",
    "spectrum_annulus",
    "spectrum_distance",
    "svd",
    "trace_for_shift",
    "truncate_to_dense",
    "weight_at",
]
