"""Equally-spaced 2D path profiles (distance, terrain, clutter) for the
terrain propagation engine.

Profile points are laid out on the WGS84 geodesic between transmitter and
receiver at a configurable maximum spacing (30 m default). Raw clutter
(DSM - DTM) is classified against a detection threshold into a single
representative clutter height per run, and the endpoint clutter values are
always forced to zero so the diffraction model does not see an artificial
obstacle at either terminal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import geodesy
from .elevation import ElevationStack
from .errors import DegenerateLink, InvalidProfile, NoCoverage, PathTooShort

DEFAULT_SPACING_M = 30.0
DEFAULT_DETECTION_THRESHOLD_M = 4.0
MIN_PATH_KM = 0.25

_SPACING_TOL_KM = 1e-6


class ClutterClass(enum.Enum):
    """Clutter categories with their default representative heights (m)."""

    WATER_OPEN_RURAL = 0.0
    SUBURBAN = 10.0
    URBAN_TREES_FOREST = 15.0
    DENSE_URBAN = 20.0

    @property
    def representative_height(self) -> float:
        return self.value


@dataclass(frozen=True)
class RawProfile:
    """Profile whose clutter column holds unclassified DSM-DTM heights."""

    distances_km: np.ndarray
    terrain_m: np.ndarray
    clutter_m: np.ndarray
    spacing_m: float

    def __post_init__(self):
        _check_geometry(self.distances_km, self.terrain_m, self.clutter_m, self.spacing_m)
        if np.any(self.clutter_m < 0):
            raise InvalidProfile("raw clutter heights must be >= 0")

    @property
    def length_km(self) -> float:
        return float(self.distances_km[-1])

    @property
    def n_points(self) -> int:
        return len(self.distances_km)


@dataclass(frozen=True)
class PathProfile:
    """Profile with representative clutter heights, endpoints forced to 0."""

    distances_km: np.ndarray
    terrain_m: np.ndarray
    clutter_m: np.ndarray
    spacing_m: float

    def __post_init__(self):
        _check_geometry(self.distances_km, self.terrain_m, self.clutter_m, self.spacing_m)
        if self.clutter_m[0] != 0.0 or self.clutter_m[-1] != 0.0:
            raise InvalidProfile("profile clutter must be zero at both endpoints")
        if np.any(self.clutter_m < 0):
            raise InvalidProfile("clutter heights must be >= 0")

    @property
    def length_km(self) -> float:
        return float(self.distances_km[-1])

    @property
    def n_points(self) -> int:
        return len(self.distances_km)


def _check_geometry(d_km, terrain, clutter, spacing_m):
    if not (len(d_km) == len(terrain) == len(clutter)):
        raise InvalidProfile("distance/terrain/clutter vectors must have equal length")
    if len(d_km) < 2:
        raise InvalidProfile("profile needs at least 2 points")
    if d_km[0] != 0.0:
        raise InvalidProfile(f"profile must start at distance 0, got {d_km[0]}")
    steps = np.diff(d_km)
    if np.any(steps <= 0):
        raise InvalidProfile("profile distances must be strictly ascending")
    if np.max(np.abs(steps - spacing_m / 1000.0)) > _SPACING_TOL_KM:
        raise InvalidProfile("profile points are not equally spaced")
    if not np.all(np.isfinite(terrain)):
        raise InvalidProfile("terrain heights must be finite (missing coverage?)")


def geodesic_points(tx_lat: float, tx_lon: float, rx_lat: float, rx_lon: float, n: int) -> np.ndarray:
    """n points on the tx->rx WGS84 geodesic, equally spaced, endpoints exact.

    Returns an (n, 2) array of (lat, lon).
    """
    if n < 2:
        raise ValueError(f"need n >= 2 points, got {n}")
    if abs(tx_lat - rx_lat) < 1e-9 and abs(tx_lon - rx_lon) < 1e-9:
        raise DegenerateLink("transmitter and receiver coincide")

    dist_m, azimuth, _ = geodesy.inverse(tx_lat, tx_lon, rx_lat, rx_lon)
    fractions = np.linspace(0.0, dist_m, n)
    lats, lons = geodesy.direct(tx_lat, tx_lon, azimuth, fractions)
    points = np.column_stack([lats, lons])
    points[0] = (tx_lat, tx_lon)
    points[-1] = (rx_lat, rx_lon)
    return points


def extract_profile(
    stack: ElevationStack,
    tx_lat: float,
    tx_lon: float,
    rx_lat: float,
    rx_lon: float,
    max_spacing_m: float = DEFAULT_SPACING_M,
) -> RawProfile:
    """Sample terrain and raw clutter along the tx->rx geodesic.

    Point count is the smallest n with spacing <= max_spacing_m and exact
    endpoints: n = ceil(d / max_spacing) + 1.
    """
    if max_spacing_m <= 0:
        raise ValueError(f"max_spacing_m must be > 0, got {max_spacing_m}")
    dist_m, _, _ = geodesy.inverse(tx_lat, tx_lon, rx_lat, rx_lon)
    if dist_m < MIN_PATH_KM * 1000.0 - 1e-4:
        raise PathTooShort(
            f"path is {dist_m / 1000.0:.3f} km; model domain starts at {MIN_PATH_KM} km"
        )

    # tolerant ceil so an exact multiple of the spacing is not oversampled
    intervals = max(1, int(np.ceil(dist_m / max_spacing_m - 1e-9)))
    n = intervals + 1
    points = geodesic_points(tx_lat, tx_lon, rx_lat, rx_lon, n)
    lats, lons = points[:, 0], points[:, 1]

    terrain = np.asarray(stack.terrain(lats, lons), dtype=float)
    if np.any(np.isnan(terrain)):
        i = int(np.argmax(np.isnan(terrain)))
        raise NoCoverage(f"no terrain coverage at profile point ({lats[i]:.6f}, {lons[i]:.6f})")
    clutter = np.asarray(stack.clutter(lats, lons), dtype=float)

    spacing_m = dist_m / intervals
    distances_km = np.linspace(0.0, dist_m / 1000.0, n)
    return RawProfile(
        distances_km=distances_km,
        terrain_m=terrain,
        clutter_m=clutter,
        spacing_m=spacing_m,
    )


def classify_clutter(
    raw: RawProfile,
    clutter_class: ClutterClass = ClutterClass.URBAN_TREES_FOREST,
    detection_threshold_m: float = DEFAULT_DETECTION_THRESHOLD_M,
) -> PathProfile:
    """Threshold raw clutter into the class's representative height.

    Heights below the detection threshold are treated as no clutter; at or
    above it the representative height is substituted. Endpoints are zeroed
    unconditionally.
    """
    if detection_threshold_m <= 0:
        raise ValueError(f"detection_threshold_m must be > 0, got {detection_threshold_m}")
    rep = np.where(
        raw.clutter_m >= detection_threshold_m, clutter_class.representative_height, 0.0
    )
    rep[0] = 0.0
    rep[-1] = 0.0
    return PathProfile(
        distances_km=raw.distances_km,
        terrain_m=raw.terrain_m,
        clutter_m=rep,
        spacing_m=raw.spacing_m,
    )


def strip_clutter(profile: PathProfile) -> PathProfile:
    """Same geometry with the clutter vector zeroed (idempotent)."""
    return replace(profile, clutter_m=np.zeros_like(profile.clutter_m))
