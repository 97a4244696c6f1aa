"""Pseudo-spectral toolkit for a fifth-order KdV-BBM water-wave model.

Simulates the periodic initial-value problem with spectral accuracy, computes
Sobolev/Gevrey norms and the conserved energy, tracks the radius of spatial
analyticity along solutions, and probes every multilinear estimate underlying
the local existence theory with randomized trials.
"""

from .analyticity import (
    BoundInputs,
    RadiusFit,
    TrackedRun,
    estimate_radius,
    lower_bound_radius,
    track_sigma,
    tracked_run,
    upper_bound_radius,
)
from .dynamics import (
    PicardDiagnostics,
    SampleRecord,
    Trajectory,
    evolve_ifrk4,
    iterate_ifrk4,
    linear_propagate,
    local_existence_time,
    nonlinear_rhs,
    picard_solve,
)
from .errors import (
    BlowUpError,
    ConfigError,
    ConstraintError,
    GridMismatchError,
    KdvBbmError,
    NoConvergenceError,
    NonFiniteError,
    NormOverflowError,
    QuadratureError,
    StepCollapseError,
    SymmetryError,
)
from .estimates import (
    FailureDemo,
    TrialReport,
    antisymmetry_check,
    existence_constant,
    failure_demo_bilinear,
    interpolation_check,
    multilinear_ratio,
    random_field,
    run_trials,
    splitting_check,
)
from .fields import cos_mode, gaussian, gevrey_synthetic
from .norms import GevreyIndex, bracket, energy, gevrey_norm, h2_polynomial_sq, sobolev_norm
from .params import (
    ABCDParams,
    CoefficientSet,
    DEFAULT_COEFFICIENTS,
    ValidationReport,
    derive_coefficients,
    validate_coefficients,
)
from .spectral import (
    RealField,
    SpectralGrid,
    Spectrum,
    apply_multiplier,
    dealiased_product,
    evaluate_symbol,
    spatial_derivative,
    spectrum_csv_rows,
    transform_forward,
    transform_inverse,
)

__version__ = "0.1.0"
