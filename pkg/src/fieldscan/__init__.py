"""Scan-based detection of mean-shift anomalies in lattice random fields.

The toolkit simulates m-dependent multivariate fields on d-dimensional
grids, scans them with a windowed mean-contrast statistic, and thresholds
that statistic with either an analytic tail bound or Monte Carlo
calibration. See the README for the command-line entry points.
"""

from .bounds import (
    BoundQuery,
    CriticalValueResult,
    ModelParams,
    critical_value,
    finite_p_bound,
    fwer_bound,
    per_window_bound,
)
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    RateEstimate,
    empirical_critical_value,
    empirical_rates,
    resolve_threads,
)
from .detect import TestReport, expected_shift, global_test
from .errors import (
    ConvergenceError,
    DataError,
    DegenerateWindowError,
    DimensionError,
    DomainError,
    EmptyScanSpaceError,
    FieldScanError,
    FormatError,
    ShapeError,
    TruncationError,
)
from .field import AnomalySpec, Box, FieldDims, MultiField, inject_anomaly
from .fieldio import load_field, load_field_csv, save_field
from .scan import (
    AllWindows,
    ContrastWeights,
    CubicWindows,
    ExplicitWindows,
    PrefixTable,
    ScanResult,
    ScanSpace,
    active_backend,
    build_prefix,
    compute_L,
    contrast_weights,
    enumerate_windows,
    scan,
    window_sum,
)
from .simulate import (
    CovarianceDiagnostic,
    SimConfig,
    covariance_diagnostic,
    derive_rep_seed,
    generate,
    splitmix64,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AllWindows",
    "AnomalySpec",
    "BoundQuery",
    "Box",
    "CalibrationConfig",
    "CalibrationResult",
    "ContrastWeights",
    "ConvergenceError",
    "CovarianceDiagnostic",
    "CriticalValueResult",
    "CubicWindows",
    "DataError",
    "DegenerateWindowError",
    "DimensionError",
    "DomainError",
    "EmptyScanSpaceError",
    "ExplicitWindows",
    "FieldDims",
    "FieldScanError",
    "FormatError",
    "ModelParams",
    "MultiField",
    "PrefixTable",
    "RateEstimate",
    "ScanResult",
    "ScanSpace",
    "ShapeError",
    "SimConfig",
    "TestReport",
    "TruncationError",
    "active_backend",
    "build_prefix",
    "compute_L",
    "contrast_weights",
    "covariance_diagnostic",
    "critical_value",
    "derive_rep_seed",
    "empirical_critical_value",
    "empirical_rates",
    "enumerate_windows",
    "expected_shift",
    "finite_p_bound",
    "fwer_bound",
    "generate",
    "global_test",
    "inject_anomaly",
    "load_field",
    "load_field_csv",
    "per_window_bound",
    "resolve_threads",
    "save_field",
    "scan",
    "window_sum",
]
