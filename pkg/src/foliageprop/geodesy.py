"""WGS84 geodesy primitives: Vincenty geodesics and UTM forward projection.

The profile builder needs exact ellipsoidal geodesics (spherical great
circles drift by hundreds of meters over 100 km, which would misplace every
profile point), and the raster sampler needs geographic -> UTM conversion to
index projected elevation grids. Both are implemented from the standard
formulations: Vincenty (1975) for the direct/inverse geodesic problems and
the Krueger series (to n^4, sub-mm inside a UTM zone) for the transverse
Mercator projection.
"""

from __future__ import annotations

import math

import numpy as np

# WGS84 ellipsoid
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)

_VINCENTY_TOL = 1e-14  # rad; keeps direct/inverse roundtrip well under 0.1 mm
_VINCENTY_MAX_ITER = 200


class GeodesicError(Exception):
    """Vincenty iteration failed to converge (near-antipodal endpoints)."""


def inverse(lat1: float, lon1: float, lat2: float, lon2: float) -> tuple[float, float, float]:
    """Solve the inverse geodesic problem.

    Returns (distance_m, azimuth1_deg, azimuth2_deg) where azimuths are
    measured clockwise from north at each endpoint.
    """
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    L = math.radians(lon2 - lon1)

    U1 = math.atan((1.0 - WGS84_F) * math.tan(phi1))
    U2 = math.atan((1.0 - WGS84_F) * math.tan(phi2))
    sinU1, cosU1 = math.sin(U1), math.cos(U1)
    sinU2, cosU2 = math.sin(U2), math.cos(U2)

    lam = L
    for _ in range(_VINCENTY_MAX_ITER):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        sin_sigma = math.hypot(cosU2 * sin_lam, cosU1 * sinU2 - sinU1 * cosU2 * cos_lam)
        if sin_sigma == 0.0:
            return 0.0, 0.0, 0.0  # coincident points
        cos_sigma = sinU1 * sinU2 + cosU1 * cosU2 * cos_lam
        sigma = math.atan2(sin_sigma, cos_sigma)
        sin_alpha = cosU1 * cosU2 * sin_lam / sin_sigma
        cos2_alpha = 1.0 - sin_alpha * sin_alpha
        if cos2_alpha == 0.0:
            cos_2sigma_m = 0.0  # equatorial line
        else:
            cos_2sigma_m = cos_sigma - 2.0 * sinU1 * sinU2 / cos2_alpha
        C = WGS84_F / 16.0 * cos2_alpha * (4.0 + WGS84_F * (4.0 - 3.0 * cos2_alpha))
        lam_prev = lam
        lam = L + (1.0 - C) * WGS84_F * sin_alpha * (
            sigma + C * sin_sigma * (cos_2sigma_m + C * cos_sigma * (-1.0 + 2.0 * cos_2sigma_m**2))
        )
        if abs(lam - lam_prev) < _VINCENTY_TOL:
            break
    else:
        raise GeodesicError("Vincenty inverse did not converge (near-antipodal points?)")

    u2 = cos2_alpha * (WGS84_A**2 - WGS84_B**2) / WGS84_B**2
    A = 1.0 + u2 / 16384.0 * (4096.0 + u2 * (-768.0 + u2 * (320.0 - 175.0 * u2)))
    B = u2 / 1024.0 * (256.0 + u2 * (-128.0 + u2 * (74.0 - 47.0 * u2)))
    delta_sigma = B * sin_sigma * (
        cos_2sigma_m
        + B / 4.0 * (
            cos_sigma * (-1.0 + 2.0 * cos_2sigma_m**2)
            - B / 6.0 * cos_2sigma_m * (-3.0 + 4.0 * sin_sigma**2) * (-3.0 + 4.0 * cos_2sigma_m**2)
        )
    )
    s = WGS84_B * A * (sigma - delta_sigma)

    az1 = math.atan2(cosU2 * math.sin(lam), cosU1 * sinU2 - sinU1 * cosU2 * math.cos(lam))
    az2 = math.atan2(cosU1 * math.sin(lam), -sinU1 * cosU2 + cosU1 * sinU2 * math.cos(lam))
    return s, math.degrees(az1) % 360.0, math.degrees(az2) % 360.0


def direct(lat1: float, lon1: float, azimuth_deg: float, distances_m) -> tuple[np.ndarray, np.ndarray]:
    """Solve the direct geodesic problem for one or many distances.

    Walks from (lat1, lon1) along the initial azimuth; `distances_m` may be a
    scalar or array. Returns (lats_deg, lons_deg) as arrays broadcast to the
    input shape.
    """
    s = np.asarray(distances_m, dtype=float)
    phi1 = math.radians(lat1)
    alpha1 = math.radians(azimuth_deg)

    U1 = math.atan((1.0 - WGS84_F) * math.tan(phi1))
    sinU1, cosU1 = math.sin(U1), math.cos(U1)
    sin_alpha1, cos_alpha1 = math.sin(alpha1), math.cos(alpha1)

    sigma1 = math.atan2(math.tan(U1), cos_alpha1)
    sin_alpha = cosU1 * sin_alpha1
    cos2_alpha = 1.0 - sin_alpha**2

    u2 = cos2_alpha * (WGS84_A**2 - WGS84_B**2) / WGS84_B**2
    A = 1.0 + u2 / 16384.0 * (4096.0 + u2 * (-768.0 + u2 * (320.0 - 175.0 * u2)))
    B = u2 / 1024.0 * (256.0 + u2 * (-128.0 + u2 * (74.0 - 47.0 * u2)))

    sigma = s / (WGS84_B * A)
    for _ in range(_VINCENTY_MAX_ITER):
        two_sigma_m = 2.0 * sigma1 + sigma
        cos_2sm = np.cos(two_sigma_m)
        sin_sigma = np.sin(sigma)
        cos_sigma = np.cos(sigma)
        delta_sigma = B * sin_sigma * (
            cos_2sm
            + B / 4.0 * (
                cos_sigma * (-1.0 + 2.0 * cos_2sm**2)
                - B / 6.0 * cos_2sm * (-3.0 + 4.0 * sin_sigma**2) * (-3.0 + 4.0 * cos_2sm**2)
            )
        )
        sigma_prev = sigma
        sigma = s / (WGS84_B * A) + delta_sigma
        if np.max(np.abs(sigma - sigma_prev)) < _VINCENTY_TOL:
            break
    else:
        raise GeodesicError("Vincenty direct did not converge")

    sin_sigma, cos_sigma = np.sin(sigma), np.cos(sigma)
    two_sigma_m = 2.0 * sigma1 + sigma
    cos_2sm = np.cos(two_sigma_m)

    tmp = sinU1 * sin_sigma - cosU1 * cos_sigma * cos_alpha1
    phi2 = np.arctan2(
        sinU1 * cos_sigma + cosU1 * sin_sigma * cos_alpha1,
        (1.0 - WGS84_F) * np.sqrt(sin_alpha**2 + tmp**2),
    )
    lam = np.arctan2(sin_sigma * sin_alpha1, cosU1 * cos_sigma - sinU1 * sin_sigma * cos_alpha1)
    C = WGS84_F / 16.0 * cos2_alpha * (4.0 + WGS84_F * (4.0 - 3.0 * cos2_alpha))
    L = lam - (1.0 - C) * WGS84_F * sin_alpha * (
        sigma + C * sin_sigma * (cos_2sm + C * cos_sigma * (-1.0 + 2.0 * cos_2sm**2))
    )
    lon2 = np.degrees(L) + lon1
    # normalize to [-180, 180)
    lon2 = (lon2 + 180.0) % 360.0 - 180.0
    return np.degrees(phi2), lon2


# --- transverse Mercator (UTM) -----------------------------------------------

# Krueger series coefficients, third flattening n = f / (2 - f)
_N = WGS84_F / (2.0 - WGS84_F)
_TM_A = WGS84_A / (1.0 + _N) * (1.0 + _N**2 / 4.0 + _N**4 / 64.0)
_ALPHA = (
    _N / 2.0 - 2.0 * _N**2 / 3.0 + 5.0 * _N**3 / 16.0 + 41.0 * _N**4 / 180.0,
    13.0 * _N**2 / 48.0 - 3.0 * _N**3 / 5.0 + 557.0 * _N**4 / 1440.0,
    61.0 * _N**3 / 240.0 - 103.0 * _N**4 / 140.0,
    49561.0 * _N**4 / 161280.0,
)

UTM_SCALE = 0.9996
UTM_FALSE_EASTING = 500000.0
UTM_FALSE_NORTHING_SOUTH = 10000000.0


def utm_forward(lat, lon, zone: int, north: bool) -> tuple[np.ndarray, np.ndarray]:
    """Geographic -> UTM easting/northing (meters) for a fixed zone.

    Accepts scalars or arrays. Valid for |lat| <= 84 deg; raises ValueError
    beyond (the UTM system does not extend to the poles).
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if np.any(np.abs(lat) > 84.0):
        raise ValueError("UTM is undefined poleward of 84 degrees latitude")
    if not 1 <= zone <= 60:
        raise ValueError(f"UTM zone must be in 1..60, got {zone}")

    lon0 = math.radians(zone * 6.0 - 183.0)
    phi = np.radians(lat)
    dlam = np.radians(lon) - lon0

    e2n = 2.0 * math.sqrt(_N) / (1.0 + _N)
    sin_phi = np.sin(phi)
    t = np.sinh(np.arctanh(sin_phi) - e2n * np.arctanh(e2n * sin_phi))
    xi_p = np.arctan2(t, np.cos(dlam))
    eta_p = np.arctanh(np.sin(dlam) / np.sqrt(1.0 + t**2))

    xi = xi_p.copy()
    eta = eta_p.copy()
    for j, a_j in enumerate(_ALPHA, start=1):
        xi = xi + a_j * np.sin(2.0 * j * xi_p) * np.cosh(2.0 * j * eta_p)
        eta = eta + a_j * np.cos(2.0 * j * xi_p) * np.sinh(2.0 * j * eta_p)

    easting = UTM_FALSE_EASTING + UTM_SCALE * _TM_A * eta
    northing = UTM_SCALE * _TM_A * xi
    if not north:
        northing = northing + UTM_FALSE_NORTHING_SOUTH
    return easting, northing


def meters_per_degree(lat_deg: float) -> tuple[float, float]:
    """Local (east, north) meters per degree on the WGS84 ellipsoid."""
    phi = math.radians(lat_deg)
    e2 = WGS84_F * (2.0 - WGS84_F)
    den = 1.0 - e2 * math.sin(phi) ** 2
    m_lat = math.pi / 180.0 * WGS84_A * (1.0 - e2) / den**1.5
    m_lon = math.pi / 180.0 * WGS84_A * math.cos(phi) / math.sqrt(den)
    return m_lon, m_lat
