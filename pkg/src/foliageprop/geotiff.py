"""Minimal single-band GeoTIFF reader/writer built on tifffile.

Supports the two reference systems the elevation datasets ship in:
geographic WGS84 (EPSG:4326) and projected UTM (EPSG:326xx/327xx). Only
axis-aligned, north-up rasters are handled; rotated model transforms are
rejected as malformed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import tifffile

from .errors import FileMissing, MalformedRaster, UnitError

_EPSG_WGS84 = 4326
_UNIT_METER = 9001


@dataclass(frozen=True)
class RasterCRS:
    """Reference system of a raster: geographic WGS84 or a UTM zone."""

    kind: str  # "geographic" | "utm"
    epsg: int
    utm_zone: int | None = None
    utm_north: bool | None = None

    @classmethod
    def from_epsg(cls, epsg: int) -> "RasterCRS":
        if epsg == _EPSG_WGS84:
            return cls(kind="geographic", epsg=epsg)
        if 32601 <= epsg <= 32660:
            return cls(kind="utm", epsg=epsg, utm_zone=epsg - 32600, utm_north=True)
        if 32701 <= epsg <= 32760:
            return cls(kind="utm", epsg=epsg, utm_zone=epsg - 32700, utm_north=False)
        raise MalformedRaster(
            f"unsupported CRS EPSG:{epsg} (supported: WGS84 geographic, WGS84 UTM)"
        )


@dataclass(frozen=True)
class GridTransform:
    """Axis-aligned pixel->world mapping.

    World coordinates of the center of pixel (row, col):
        x = origin_x + (col + 0.5) * scale_x
        y = origin_y - (row + 0.5) * scale_y
    origin_* is the outer corner of pixel (0, 0); y decreases with row
    (north-up raster).
    """

    origin_x: float
    origin_y: float
    scale_x: float
    scale_y: float

    def world_to_pixel(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """World -> fractional pixel-center coordinates (col, row)."""
        col = (np.asarray(x, dtype=float) - self.origin_x) / self.scale_x - 0.5
        row = (self.origin_y - np.asarray(y, dtype=float)) / self.scale_y - 0.5
        return col, row

    def pixel_center_to_world(self, row, col) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin_x + (np.asarray(col, dtype=float) + 0.5) * self.scale_x
        y = self.origin_y - (np.asarray(row, dtype=float) + 0.5) * self.scale_y
        return x, y


@dataclass(frozen=True)
class GeoTiffRaster:
    heights: np.ndarray  # 2D float64
    crs: RasterCRS
    transform: GridTransform
    nodata: float | None


def _geokeys(meta: dict, name: str, default=None):
    value = meta.get(name, default)
    return int(value) if value is not None else None


def read_geotiff(path: str | os.PathLike) -> GeoTiffRaster:
    """Read a single-band georeferenced TIFF.

    Raises FileMissing, MalformedRaster, or UnitError per the validation
    rules in the module docstring.
    """
    if not os.path.exists(path):
        raise FileMissing(f"raster file not found: {path}")

    try:
        tif = tifffile.TiffFile(path)
    except Exception as exc:
        raise MalformedRaster(f"not a readable TIFF: {path}: {exc}") from exc

    with tif:
        page = tif.pages[0]
        samples = page.tags.get(277)
        if samples is not None and int(samples.value) != 1:
            raise MalformedRaster(f"expected single-band raster, got {samples.value} samples")

        if not tif.is_geotiff:
            raise MalformedRaster(f"no georeferencing tags present: {path}")
        meta = tif.geotiff_metadata or {}

        model_type = _geokeys(meta, "GTModelTypeGeoKey")
        if model_type == 2:
            epsg = _geokeys(meta, "GeographicTypeGeoKey", _EPSG_WGS84)
            if epsg != _EPSG_WGS84:
                raise MalformedRaster(f"unsupported geographic CRS EPSG:{epsg}")
            crs = RasterCRS.from_epsg(_EPSG_WGS84)
        elif model_type == 1:
            epsg = _geokeys(meta, "ProjectedCSTypeGeoKey")
            if epsg is None:
                raise MalformedRaster("projected raster without ProjectedCSTypeGeoKey")
            crs = RasterCRS.from_epsg(epsg)
            linear = _geokeys(meta, "ProjLinearUnitsGeoKey", _UNIT_METER)
            if linear != _UNIT_METER:
                raise UnitError(f"projected linear units must be meters (9001), got {linear}")
        else:
            raise MalformedRaster(f"unsupported GeoTIFF model type: {model_type}")

        vertical = _geokeys(meta, "VerticalUnitsGeoKey", _UNIT_METER)
        if vertical != _UNIT_METER:
            raise UnitError(f"vertical units must be meters (9001), got {vertical}")

        transform = _transform_from_meta(meta)
        pixel_is_point = _geokeys(meta, "GTRasterTypeGeoKey", 1) == 2
        if pixel_is_point:
            # shift so stored coordinates refer to cell centers
            transform = GridTransform(
                origin_x=transform.origin_x - 0.5 * transform.scale_x,
                origin_y=transform.origin_y + 0.5 * transform.scale_y,
                scale_x=transform.scale_x,
                scale_y=transform.scale_y,
            )

        nodata = None
        nodata_tag = page.tags.get(42113)
        if nodata_tag is not None:
            try:
                nodata = float(str(nodata_tag.value).strip())
            except ValueError:
                raise MalformedRaster(f"unparseable GDAL_NODATA value: {nodata_tag.value!r}")

        heights = np.asarray(page.asarray(), dtype=np.float64)
        if heights.ndim != 2:
            raise MalformedRaster(f"expected a 2D single-band raster, got shape {heights.shape}")

    return GeoTiffRaster(heights=heights, crs=crs, transform=transform, nodata=nodata)


def _transform_from_meta(meta: dict) -> GridTransform:
    scale = meta.get("ModelPixelScale")
    tiepoint = meta.get("ModelTiepoint")
    matrix = meta.get("ModelTransformation")

    if scale is not None and tiepoint is not None:
        sx, sy = float(scale[0]), float(scale[1])
        i, j = float(tiepoint[0]), float(tiepoint[1])
        x, y = float(tiepoint[3]), float(tiepoint[4])
        if sx <= 0 or sy <= 0:
            raise MalformedRaster(f"pixel scale must be positive, got ({sx}, {sy})")
        # tiepoint maps raster point (i, j) to world (x, y)
        return GridTransform(origin_x=x - i * sx, origin_y=y + j * sy, scale_x=sx, scale_y=sy)

    if matrix is not None:
        m = np.asarray(matrix, dtype=float).reshape(4, 4)
        if m[0, 1] != 0.0 or m[1, 0] != 0.0:
            raise MalformedRaster("rotated model transforms are not supported")
        sx, sy = m[0, 0], -m[1, 1]
        if sx <= 0 or sy <= 0:
            raise MalformedRaster("model transform is not north-up or is singular")
        return GridTransform(origin_x=m[0, 3], origin_y=m[1, 3], scale_x=sx, scale_y=sy)

    raise MalformedRaster("raster has neither ModelPixelScale+ModelTiepoint nor ModelTransformation")


def write_geotiff(
    path: str | os.PathLike,
    heights: np.ndarray,
    crs: RasterCRS,
    transform: GridTransform,
    nodata: float | None = None,
) -> None:
    """Write a single-band float32 GeoTIFF (pixel-is-area convention)."""
    if crs.kind == "geographic":
        geokeys = [
            (1024, 0, 1, 2),  # ModelType = Geographic
            (1025, 0, 1, 1),  # RasterType = PixelIsArea
            (2048, 0, 1, crs.epsg),
        ]
    else:
        geokeys = [
            (1024, 0, 1, 1),  # ModelType = Projected
            (1025, 0, 1, 1),
            (3072, 0, 1, crs.epsg),
            (3076, 0, 1, _UNIT_METER),
        ]
    directory = [1, 1, 0, len(geokeys)]
    for key in geokeys:
        directory.extend(key)

    extratags = [
        (33550, "d", 3, (transform.scale_x, transform.scale_y, 0.0)),
        (33922, "d", 6, (0.0, 0.0, 0.0, transform.origin_x, transform.origin_y, 0.0)),
        (34735, "H", len(directory), tuple(directory)),
    ]
    if nodata is not None:
        extratags.append((42113, "s", 0, repr(float(nodata)) if nodata != int(nodata) else str(int(nodata))))

    tifffile.imwrite(path, np.asarray(heights, dtype=np.float32), extratags=extratags)
