"""Elevation data stack: terrain (DTM) and surface (DSM) rasters with fallback.

The surface-minus-terrain difference is the clutter height used both for
profile classification and for the foliage ray intersection. A coarse
fallback terrain grid fills DTM gaps, but clutter is only derived where the
high-resolution pair covers the point; fallback-only regions report zero
clutter. A tree-growth offset (meters, subtracted from clutter at sampling
time) corrects for surveys captured years after the measurements.

All grids are immutable after load and sampling is pure, so the stack can be
shared freely across threads. The nodata marker in all sampling APIs is NaN.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import geodesy
from .errors import MalformedRaster, NegativeInput, NoCoverage, TransformFailure
from .geotiff import GridTransform, RasterCRS, read_geotiff

HEIGHT_MIN_M = -500.0
HEIGHT_MAX_M = 9000.0


class GridKind(enum.Enum):
    TERRAIN = "terrain"
    SURFACE = "surface"


@dataclass(frozen=True)
class ElevationGrid:
    """A single georeferenced height field (meters above sea level)."""

    kind: GridKind
    crs: RasterCRS
    transform: GridTransform
    resolution: tuple[float, float]  # meters per pixel (x, y)
    nodata: float | None
    heights: np.ndarray

    def __post_init__(self):
        if self.resolution[0] <= 0 or self.resolution[1] <= 0:
            raise MalformedRaster(f"resolution must be positive, got {self.resolution}")
        valid = self._valid_mask(self.heights)
        data = self.heights[valid]
        if data.size and (np.min(data) < HEIGHT_MIN_M or np.max(data) > HEIGHT_MAX_M):
            raise MalformedRaster(
                f"heights outside [{HEIGHT_MIN_M}, {HEIGHT_MAX_M}] m: "
                f"range [{np.min(data)}, {np.max(data)}]"
            )
        self.heights.setflags(write=False)

    def _valid_mask(self, values: np.ndarray) -> np.ndarray:
        mask = np.isfinite(values)
        if self.nodata is not None:
            mask &= values != self.nodata
        return mask

    def sample(self, lats, lons) -> np.ndarray:
        """Bilinear sample at geographic coordinates; NaN where not covered.

        A sample is NaN if the point falls outside the convex hull of cell
        centers or any of the four contributing cells is nodata.
        """
        lats = np.asarray(lats, dtype=float)
        lons = np.asarray(lons, dtype=float)
        if self.crs.kind == "geographic":
            x, y = lons, lats
        else:
            try:
                x, y = geodesy.utm_forward(lats, lons, self.crs.utm_zone, self.crs.utm_north)
            except ValueError as exc:
                raise TransformFailure(str(exc)) from exc

        col, row = self.transform.world_to_pixel(x, y)
        scalar = np.ndim(col) == 0 and np.ndim(row) == 0
        col, row = np.atleast_1d(col), np.atleast_1d(row)
        col, row = np.broadcast_arrays(col.copy(), row.copy())
        # snap coordinate-roundoff so exact cell centers reproduce stored values
        for arr in (col, row):
            nearest = np.round(arr)
            snap = np.abs(arr - nearest) < 1e-9
            arr[snap] = nearest[snap]
        nrows, ncols = self.heights.shape
        out = np.full(col.shape, np.nan)

        inside = (col >= 0.0) & (col <= ncols - 1) & (row >= 0.0) & (row <= nrows - 1)
        if np.any(inside):
            c = col[inside]
            r = row[inside]
            c0 = np.clip(np.floor(c).astype(int), 0, max(ncols - 2, 0))
            r0 = np.clip(np.floor(r).astype(int), 0, max(nrows - 2, 0))
            c1 = np.minimum(c0 + 1, ncols - 1)
            r1 = np.minimum(r0 + 1, nrows - 1)
            fc = c - c0
            fr = r - r0

            v00 = self.heights[r0, c0]
            v01 = self.heights[r0, c1]
            v10 = self.heights[r1, c0]
            v11 = self.heights[r1, c1]
            valid = (
                self._valid_mask(v00) & self._valid_mask(v01)
                & self._valid_mask(v10) & self._valid_mask(v11)
            )
            value = (
                v00 * (1.0 - fr) * (1.0 - fc)
                + v01 * (1.0 - fr) * fc
                + v10 * fr * (1.0 - fc)
                + v11 * fr * fc
            )
            out[inside] = np.where(valid, value, np.nan)
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ElevationStack:
    """DTM + DSM pair with optional coarse fallback terrain."""

    dtm: ElevationGrid
    dsm: ElevationGrid
    fallback_dtm: ElevationGrid | None = None
    tree_growth_offset: float = 0.0

    def __post_init__(self):
        if self.dtm.kind is not GridKind.TERRAIN:
            raise MalformedRaster("stack dtm grid must have kind TERRAIN")
        if self.dsm.kind is not GridKind.SURFACE:
            raise MalformedRaster("stack dsm grid must have kind SURFACE")
        if self.fallback_dtm is not None and self.fallback_dtm.kind is not GridKind.TERRAIN:
            raise MalformedRaster("fallback grid must have kind TERRAIN")
        if self.tree_growth_offset < 0:
            raise NegativeInput(f"tree_growth_offset must be >= 0, got {self.tree_growth_offset}")

    def terrain(self, lats, lons) -> np.ndarray:
        """Terrain height ASL; DTM first, fallback where DTM has no data."""
        h = self.dtm.sample(lats, lons)
        if self.fallback_dtm is not None:
            h = np.asarray(h, dtype=float)
            gaps = np.isnan(h)
            if np.any(gaps):
                fb = np.asarray(self.fallback_dtm.sample(lats, lons), dtype=float)
                h = np.where(gaps, fb, h)
        return h

    def clutter(self, lats, lons) -> np.ndarray:
        """Clutter height above terrain, tree-growth corrected, floored at 0.

        Zero wherever the DSM (or the high-resolution DTM) has no data; NaN
        only where no terrain grid covers the point at all.
        """
        dtm = np.asarray(self.dtm.sample(lats, lons), dtype=float)
        dsm = np.asarray(self.dsm.sample(lats, lons), dtype=float)
        clutter = np.maximum(dsm - self.tree_growth_offset - dtm, 0.0)
        clutter = np.where(np.isnan(dtm) | np.isnan(dsm), 0.0, clutter)
        covered = ~np.isnan(np.asarray(self.terrain(lats, lons), dtype=float))
        return np.where(covered, clutter, np.nan)


def load_grid(path, kind: GridKind) -> ElevationGrid:
    """Load a georeferenced single-band raster as an elevation grid."""
    raster = read_geotiff(path)
    if raster.crs.kind == "utm":
        resolution = (raster.transform.scale_x, raster.transform.scale_y)
    else:
        nrows = raster.heights.shape[0]
        center_lat = raster.transform.origin_y - 0.5 * nrows * raster.transform.scale_y
        m_lon, m_lat = geodesy.meters_per_degree(center_lat)
        resolution = (raster.transform.scale_x * m_lon, raster.transform.scale_y * m_lat)
    return ElevationGrid(
        kind=kind,
        crs=raster.crs,
        transform=raster.transform,
        resolution=resolution,
        nodata=raster.nodata,
        heights=raster.heights,
    )


def sample_height(grid: ElevationGrid, lat: float, lon: float) -> float:
    """Bilinear height sample; NaN is the nodata/out-of-bounds marker."""
    return float(grid.sample(lat, lon))


def terrain_height_at(stack: ElevationStack, lat: float, lon: float) -> float:
    """Terrain height ASL from the DTM, or the fallback grid where DTM is void."""
    h = float(np.asarray(stack.terrain(lat, lon), dtype=float))
    if np.isnan(h):
        raise NoCoverage(f"no terrain coverage at ({lat}, {lon})")
    return h


def clutter_height_at(stack: ElevationStack, lat: float, lon: float) -> float:
    """Clutter height (DSM - growth offset - DTM, floored at 0)."""
    c = float(np.asarray(stack.clutter(lat, lon), dtype=float))
    if np.isnan(c):
        raise NoCoverage(f"no terrain coverage at ({lat}, {lon})")
    return c


def apply_tree_growth(stack: ElevationStack, rate_m_per_year: float, years: float) -> ElevationStack:
    """Return a stack whose clutter is reduced by rate * years meters.

    The rasters are untouched; the offset is applied when sampling, with
    clutter floored at zero.
    """
    if rate_m_per_year < 0 or years < 0:
        raise NegativeInput(
            f"rate and years must be >= 0, got rate={rate_m_per_year}, years={years}"
        )
    return replace(stack, tree_growth_offset=rate_m_per_year * years)
