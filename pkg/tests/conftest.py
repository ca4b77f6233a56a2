"""Shared synthetic elevation fixtures.

Grids are built in memory (geographic CRS unless a test needs metric
geometry, in which case UTM zone 18N around 45.3N 75W is used so the
transverse Mercator scale error stays negligible).
"""

import numpy as np
import pytest

from foliageprop import geodesy
from foliageprop.elevation import ElevationGrid, ElevationStack, GridKind
from foliageprop.geotiff import GridTransform, RasterCRS

ANCHOR_LAT = 45.3
ANCHOR_LON = -76.1


def make_geo_grid(
    kind,
    heights,
    lat_max=45.45,
    lon_min=-76.2,
    cell_deg=0.0003,
    nodata=-9999.0,
):
    """Geographic-CRS grid whose (0, 0) cell corner sits at (lat_max, lon_min)."""
    heights = np.asarray(heights, dtype=float)
    transform = GridTransform(
        origin_x=lon_min, origin_y=lat_max, scale_x=cell_deg, scale_y=cell_deg
    )
    m_lon, m_lat = geodesy.meters_per_degree(lat_max - heights.shape[0] * cell_deg / 2.0)
    return ElevationGrid(
        kind=kind,
        crs=RasterCRS.from_epsg(4326),
        transform=transform,
        resolution=(cell_deg * m_lon, cell_deg * m_lat),
        nodata=nodata,
        heights=heights,
    )


def make_flat_stack(
    terrain_m=100.0,
    clutter_m=0.0,
    shape=(300, 500),
    cell_deg=0.001,
    fallback=None,
):
    """Uniform terrain with optional uniform canopy everywhere.

    Default extent: lat 45.15..45.45, lon -76.2..-75.7 (anchor well inside).
    """
    dtm = make_geo_grid(GridKind.TERRAIN, np.full(shape, terrain_m), cell_deg=cell_deg)
    dsm = make_geo_grid(GridKind.SURFACE, np.full(shape, terrain_m + clutter_m), cell_deg=cell_deg)
    return ElevationStack(dtm=dtm, dsm=dsm, fallback_dtm=fallback)


@pytest.fixture
def flat_stack():
    # ~33 km x ~39 km of flat 100 m terrain, no clutter
    return make_flat_stack()


@pytest.fixture
def forest_stack():
    """Flat terrain with an 18 m canopy band crossing the default test path."""
    shape = (300, 500)
    terrain = np.full(shape, 100.0)
    surface = terrain.copy()
    # canopy on a longitude band roughly 1.1-2.2 km east of the anchor
    lon0 = -76.2
    cell = 0.001
    j0 = int(round((ANCHOR_LON + 0.014 - lon0) / cell))
    j1 = int(round((ANCHOR_LON + 0.028 - lon0) / cell))
    surface[:, j0:j1] += 18.0
    dtm = make_geo_grid(GridKind.TERRAIN, terrain, cell_deg=cell)
    dsm = make_geo_grid(GridKind.SURFACE, surface, cell_deg=cell)
    return ElevationStack(dtm=dtm, dsm=dsm)


def make_slab_stack(
    canopy_height=20.0,
    slab_start=100.0,
    slab_end=200.0,
    terrain_m=0.0,
):
    """Metric slab scenario on the UTM zone-18 central meridian.

    Terrain is flat; the DSM adds a canopy over easting offsets
    [slab_start, slab_end] m east of the anchor point (bilinear edges fall
    exactly on the slab bounds). Returns (stack, tx_lat, tx_lon).
    """
    lat, lon = 45.3, -75.0  # on the central meridian: no grid convergence
    e0, n0 = geodesy.utm_forward(lat, lon, 18, True)
    e0, n0 = float(e0), float(n0)

    ncols, nrows = 420, 40
    origin_x = e0 - 50.0
    origin_y = n0 + 20.0
    terrain = np.full((nrows, ncols), terrain_m)
    surface = terrain.copy()
    centers = origin_x + np.arange(ncols) + 0.5 - e0
    in_slab = (centers >= slab_start + 0.5 - 1e-9) & (centers <= slab_end - 0.5 + 1e-9)
    surface[:, in_slab] += canopy_height

    transform = GridTransform(origin_x=origin_x, origin_y=origin_y, scale_x=1.0, scale_y=1.0)
    crs = RasterCRS.from_epsg(32618)

    dtm = ElevationGrid(
        kind=GridKind.TERRAIN, crs=crs, transform=transform,
        resolution=(1.0, 1.0), nodata=-9999.0, heights=terrain,
    )
    dsm = ElevationGrid(
        kind=GridKind.SURFACE, crs=crs, transform=transform,
        resolution=(1.0, 1.0), nodata=-9999.0, heights=surface,
    )
    return ElevationStack(dtm=dtm, dsm=dsm), lat, lon


@pytest.fixture
def slab_stack():
    return make_slab_stack()


def east_of(lat, lon, meters):
    """Point `meters` due (geodesic) east of (lat, lon)."""
    lat2, lon2 = geodesy.direct(lat, lon, 90.0, meters)
    return float(lat2), float(lon2)
