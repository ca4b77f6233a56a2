"""Hybrid RF path-loss prediction for foliage-dominant rural environments.

Combines a terrain propagation engine (ITU-R P.1812-6 run without clutter)
with a radiative-energy-transfer foliage attenuation term clamped at a
configurable limit, plus the drive-test validation pipeline used to score
such models (geohash-8 median binning, bin validity rules, RMSE).
"""

__version__ = "0.1.0"

from .elevation import (
    ElevationGrid,
    ElevationStack,
    GridKind,
    apply_tree_growth,
    clutter_height_at,
    load_grid,
    sample_height,
    terrain_height_at,
)
from .estimator import FoliagePathLoss, check_coordinates
from .hybrid import (
    GridPrediction,
    HybridConfig,
    PredictionMode,
    PredictionResult,
    predict,
    predict_grid,
)
from .p1812 import (
    LinkParams,
    ModelEnvironment,
    Polarization,
    path_loss_modes,
    path_loss_p1812,
)
from .profile import (
    ClutterClass,
    PathProfile,
    RawProfile,
    classify_clutter,
    extract_profile,
    geodesic_points,
    strip_clutter,
)
from .ret import (
    FoliageIntersection,
    LeafState,
    RetCoefficients,
    RetLimit,
    RetParameters,
    clamp_ret,
    dual_slope_loss,
    intersect_ray_with_clutter,
    load_ret_parameters,
    ret_curve,
    ret_loss,
)
from .validation import (
    MeasurementBin,
    MeasurementRecord,
    ValidationReport,
    bin_measurements,
    bin_validity,
    error_histogram,
    geohash8,
    geohash_decode,
    mean_error,
    read_measurements_csv,
    rmse,
    sweep_ret_limit,
    validate_measurements,
)

__all__ = [
    "__version__",
    "ElevationGrid", "ElevationStack", "GridKind", "apply_tree_growth",
    "clutter_height_at", "load_grid", "sample_height", "terrain_height_at",
    "FoliagePathLoss", "check_coordinates",
    "GridPrediction", "HybridConfig", "PredictionMode", "PredictionResult",
    "predict", "predict_grid",
    "LinkParams", "ModelEnvironment", "Polarization",
    "path_loss_modes", "path_loss_p1812",
    "ClutterClass", "PathProfile", "RawProfile", "classify_clutter",
    "extract_profile", "geodesic_points", "strip_clutter",
    "FoliageIntersection", "LeafState", "RetCoefficients", "RetLimit",
    "RetParameters", "clamp_ret", "dual_slope_loss",
    "intersect_ray_with_clutter", "load_ret_parameters", "ret_curve", "ret_loss",
    "MeasurementBin", "MeasurementRecord", "ValidationReport",
    "bin_measurements", "bin_validity", "error_histogram",
    "geohash8", "geohash_decode", "mean_error", "read_measurements_csv",
    "rmse", "sweep_ret_limit", "validate_measurements",
]
