"""Hybrid path-loss prediction: terrain engine plus clamped foliage term.

The headline quantity is

    path_loss = p1812_no_clutter + min(ret_loss_raw, ret_limit)

i.e. the terrain model runs with clutter stripped from the profile (all
clutter is assumed to be foliage) and the foliage attenuation of the direct
ray, clamped at a configurable limit, is added on top. Two baseline modes
run the terrain model alone, either with classified representative clutter
in the profile or with none, for comparison studies.

Everything here is pure computation over an immutable elevation stack, so
point predictions can run concurrently; the grid evaluator keeps results
ordered by cell regardless of worker count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geodesy
from .elevation import ElevationStack
from .errors import EmptyRegion, PathTooShort
from .p1812 import LinkParams, ModelEnvironment, Polarization, path_loss_p1812
from .profile import (
    DEFAULT_DETECTION_THRESHOLD_M,
    DEFAULT_SPACING_M,
    ClutterClass,
    classify_clutter,
    extract_profile,
    strip_clutter,
)
from .ret import (
    DEFAULT_INTERSECTION_STEP_M,
    RetLimit,
    RetParameters,
    clamp_ret,
    intersect_ray_with_clutter,
    load_ret_parameters,
    ret_loss,
)


class PredictionMode(enum.Enum):
    HYBRID = "hybrid"
    P1812_CLUTTER = "p1812-clutter"
    P1812_NO_CLUTTER = "p1812-no-clutter"


@dataclass(frozen=True)
class HybridConfig:
    """All model settings apart from the link itself.

    The default limit is the semi-rural 20 dB preset; use
    `RetLimit.heavily_forested()` (30 dB) for densely wooded regions.
    """

    mode: PredictionMode = PredictionMode.HYBRID
    clutter_class: ClutterClass = ClutterClass.URBAN_TREES_FOREST
    ret_params: RetParameters = field(default_factory=load_ret_parameters)
    ret_limit: RetLimit = field(default_factory=RetLimit.semi_rural)
    environment: ModelEnvironment = field(default_factory=ModelEnvironment)
    detection_threshold_m: float = DEFAULT_DETECTION_THRESHOLD_M
    profile_spacing_m: float = DEFAULT_SPACING_M
    intersection_step_m: float = DEFAULT_INTERSECTION_STEP_M
    frequency_mhz: float = 3500.0
    rx_height_m: float = 2.5
    polarization: Polarization = Polarization.VERTICAL


@dataclass(frozen=True)
class PredictionResult:
    """All loss components of one point prediction plus diagnostics."""

    mode: PredictionMode
    path_loss_db: float
    p1812_no_clutter_db: float
    p1812_with_clutter_db: float | None
    ret_loss_raw_db: float
    ret_loss_clamped_db: float
    foliage_depth_m: float
    theta_deg: float | None
    path_length_km: float
    n_profile_points: int
    used_fallback_terrain: bool = False

    def __post_init__(self):
        if self.mode is not PredictionMode.P1812_CLUTTER:
            combined = self.p1812_no_clutter_db + self.ret_loss_clamped_db
            if self.path_loss_db != combined:
                raise ValueError(
                    "path_loss_db must equal p1812_no_clutter_db + ret_loss_clamped_db"
                )

    def as_dict(self) -> dict:
        d = {
            "mode": self.mode.value,
            "path_loss_db": self.path_loss_db,
            "p1812_no_clutter_db": self.p1812_no_clutter_db,
            "p1812_with_clutter_db": self.p1812_with_clutter_db,
            "ret_loss_raw_db": self.ret_loss_raw_db,
            "ret_loss_clamped_db": self.ret_loss_clamped_db,
            "foliage_depth_m": self.foliage_depth_m,
            "theta_deg": self.theta_deg,
            "path_length_km": self.path_length_km,
            "n_profile_points": self.n_profile_points,
            "used_fallback_terrain": self.used_fallback_terrain,
        }
        return d


def predict(
    stack: ElevationStack,
    link: LinkParams,
    config: HybridConfig | None = None,
) -> PredictionResult:
    """Point-to-point prediction for one link."""
    config = config or HybridConfig()

    raw = extract_profile(
        stack, link.tx_lat, link.tx_lon, link.rx_lat, link.rx_lon,
        max_spacing_m=config.profile_spacing_m,
    )
    classified = classify_clutter(raw, config.clutter_class, config.detection_threshold_m)
    no_clutter = path_loss_p1812(strip_clutter(classified), link, config.environment)

    with_clutter = None
    if config.mode is PredictionMode.P1812_CLUTTER:
        with_clutter = path_loss_p1812(classified, link, config.environment)

    ret_raw = 0.0
    ret_clamped = 0.0
    depth = 0.0
    theta = None
    fallback_used = _fallback_used(stack, link, raw.n_points)
    if config.mode is PredictionMode.HYBRID:
        hit = intersect_ray_with_clutter(
            stack,
            link.tx_lat, link.tx_lon, link.tx_height_m,
            link.rx_lat, link.rx_lon, link.rx_height_m,
            step_m=config.intersection_step_m,
        )
        depth = hit.total_depth_m
        theta = hit.theta_deg
        if depth > 0.0:
            ret_raw = ret_loss(config.ret_params, depth, theta)
            ret_clamped = clamp_ret(ret_raw, config.ret_limit)

    if config.mode is PredictionMode.P1812_CLUTTER:
        headline = with_clutter
    else:
        headline = no_clutter + ret_clamped

    return PredictionResult(
        mode=config.mode,
        path_loss_db=headline,
        p1812_no_clutter_db=no_clutter,
        p1812_with_clutter_db=with_clutter,
        ret_loss_raw_db=ret_raw,
        ret_loss_clamped_db=ret_clamped,
        foliage_depth_m=depth,
        theta_deg=theta,
        path_length_km=raw.length_km,
        n_profile_points=raw.n_points,
        used_fallback_terrain=fallback_used,
    )


def _fallback_used(stack: ElevationStack, link: LinkParams, n_points: int) -> bool:
    """True when any profile point fell back to the coarse terrain grid."""
    if stack.fallback_dtm is None:
        return False
    from .profile import geodesic_points

    pts = geodesic_points(link.tx_lat, link.tx_lon, link.rx_lat, link.rx_lon, n_points)
    dtm = np.asarray(stack.dtm.sample(pts[:, 0], pts[:, 1]), dtype=float)
    return bool(np.any(np.isnan(dtm)))


@dataclass(frozen=True)
class GridPrediction:
    """Coverage over a lat/lon box; NaN + mask mark out-of-domain cells."""

    lats: np.ndarray            # (nrows,) cell-center latitudes, north to south
    lons: np.ndarray            # (ncols,) cell-center longitudes, west to east
    path_loss_db: np.ndarray    # (nrows, ncols)
    p1812_no_clutter_db: np.ndarray
    foliage_depth_m: np.ndarray
    out_of_domain: np.ndarray   # bool (nrows, ncols)


def predict_grid(
    stack: ElevationStack,
    tx_lat: float,
    tx_lon: float,
    tx_height_m: float,
    region: tuple[float, float, float, float],
    resolution_m: float,
    config: HybridConfig | None = None,
    workers: int = 1,
) -> GridPrediction:
    """One prediction per cell center of a regular grid over `region`.

    `region` is (lat_min, lat_max, lon_min, lon_max). Cells closer than the
    model's 0.25 km floor to the transmitter are flagged out-of-domain
    instead of failing the run.
    """
    config = config or HybridConfig()
    lat_min, lat_max, lon_min, lon_max = region
    if lat_max <= lat_min or lon_max <= lon_min or resolution_m <= 0:
        raise EmptyRegion(f"empty region {region} at resolution {resolution_m} m")

    m_lon, m_lat = geodesy.meters_per_degree((lat_min + lat_max) / 2.0)
    dlat = resolution_m / m_lat
    dlon = resolution_m / m_lon
    nrows = int(math.floor((lat_max - lat_min) / dlat))
    ncols = int(math.floor((lon_max - lon_min) / dlon))
    if nrows < 1 or ncols < 1:
        raise EmptyRegion(f"region {region} holds no {resolution_m} m cell")

    lats = lat_max - (np.arange(nrows) + 0.5) * dlat
    lons = lon_min + (np.arange(ncols) + 0.5) * dlon

    cells = [(i, j) for i in range(nrows) for j in range(ncols)]

    def evaluate(cell):
        i, j = cell
        link = LinkParams(
            frequency_mhz=config.frequency_mhz,
            tx_height_m=tx_height_m,
            rx_height_m=config.rx_height_m,
            tx_lat=tx_lat, tx_lon=tx_lon,
            rx_lat=float(lats[i]), rx_lon=float(lons[j]),
            polarization=config.polarization,
        )
        try:
            result = predict(stack, link, config)
        except PathTooShort:
            return None
        return result

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, cells))
    else:
        results = [evaluate(c) for c in cells]

    shape = (nrows, ncols)
    path_loss = np.full(shape, np.nan)
    no_clutter = np.full(shape, np.nan)
    depth = np.full(shape, np.nan)
    out_of_domain = np.zeros(shape, dtype=bool)
    for (i, j), result in zip(cells, results):
        if result is None:
            out_of_domain[i, j] = True
        else:
            path_loss[i, j] = result.path_loss_db
            no_clutter[i, j] = result.p1812_no_clutter_db
            depth[i, j] = result.foliage_depth_m

    return GridPrediction(
        lats=lats, lons=lons,
        path_loss_db=path_loss,
        p1812_no_clutter_db=no_clutter,
        foliage_depth_m=depth,
        out_of_domain=out_of_domain,
    )
