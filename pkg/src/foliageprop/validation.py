"""Drive-test validation pipeline: geohash binning, bin validity, RMSE.

Measurements are grouped into geohash-8 cells (about 38.2 x 19.1 m at the
equator). Each bin compares the median measured path loss against the median
of per-record predictions. A bin only counts when it holds at least three
records and its measured median sits at least 6 dB below the maximum
measurable loss (EIRP minus noise floor), so receiver-floor saturation does
not contaminate the statistics. The error convention throughout is
predicted - measured: positive errors mean the model overpredicts loss.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .elevation import ElevationStack
from .errors import (
    CoordinateOutOfRange,
    EmptyInput,
    MixedTransmitters,
    NoValidBins,
)
from .hybrid import HybridConfig, PredictionMode, predict
from .p1812 import LinkParams
from .ret import clamp_ret

DEFAULT_MIN_BIN_COUNT = 3
DEFAULT_VALIDITY_MARGIN_DB = 6.0
DEFAULT_HISTOGRAM_WIDTH_DB = 2.0

_BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
_GEOHASH_PRECISION = 8

MEASUREMENT_CSV_COLUMNS = (
    "lat", "lon", "pl_db", "freq_mhz", "tx_id", "eirp_dbm", "noise_floor_dbm", "rx_height_m",
)


# --- geohash -------------------------------------------------------------------

def geohash8(lat: float, lon: float) -> str:
    """Standard base-32 geohash at precision 8."""
    if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
        raise CoordinateOutOfRange(f"({lat}, {lon}) outside valid lat/lon ranges")

    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    chars = []
    bits = 0
    value = 0
    even = True  # longitude bit first
    while len(chars) < _GEOHASH_PRECISION:
        if even:
            mid = (lon_lo + lon_hi) / 2.0
            if lon >= mid:
                value = (value << 1) | 1
                lon_lo = mid
            else:
                value <<= 1
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if lat >= mid:
                value = (value << 1) | 1
                lat_lo = mid
            else:
                value <<= 1
                lat_hi = mid
        even = not even
        bits += 1
        if bits == 5:
            chars.append(_BASE32[value])
            bits = 0
            value = 0
    return "".join(chars)


def geohash_decode(geohash: str) -> tuple[float, float, float, float]:
    """Bounds (lat_lo, lat_hi, lon_lo, lon_hi) of a geohash cell."""
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for ch in geohash:
        try:
            value = _BASE32.index(ch)
        except ValueError:
            raise ValueError(f"invalid geohash character {ch!r}")
        for shift in range(4, -1, -1):
            bit = (value >> shift) & 1
            if even:
                mid = (lon_lo + lon_hi) / 2.0
                if bit:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2.0
                if bit:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return lat_lo, lat_hi, lon_lo, lon_hi


# --- records and bins -------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementRecord:
    lat: float
    lon: float
    pl_measured_db: float
    frequency_mhz: float
    tx_id: str
    tx_eirp_dbm: float
    noise_floor_dbm: float
    rx_height_m: float

    def __post_init__(self):
        if self.pl_measured_db <= 0:
            raise ValueError(f"measured path loss must be > 0 dB, got {self.pl_measured_db}")
        if self.tx_eirp_dbm <= self.noise_floor_dbm:
            raise ValueError("tx_eirp_dbm must exceed noise_floor_dbm")

    @property
    def max_path_loss_db(self) -> float:
        return self.tx_eirp_dbm - self.noise_floor_dbm


@dataclass(frozen=True)
class MeasurementBin:
    geohash: str
    count: int
    median_measured_db: float
    median_predicted_db: float
    max_path_loss_db: float  # most restrictive (minimum) across the bin's records
    valid: bool


@dataclass(frozen=True)
class ValidationReport:
    rmse_db: float
    mean_error_db: float
    bin_count_total: int
    bin_count_valid: int
    histogram: tuple[tuple[float, int], ...]  # (error bin center dB, frequency)


def bin_validity(
    bin_: MeasurementBin,
    max_path_loss_db: float | None = None,
    margin_db: float = DEFAULT_VALIDITY_MARGIN_DB,
    min_count: int = DEFAULT_MIN_BIN_COUNT,
) -> bool:
    """A bin is valid iff it has enough records and is clear of the noise floor."""
    if margin_db < 0:
        raise ValueError(f"margin must be >= 0, got {margin_db}")
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    ceiling = bin_.max_path_loss_db if max_path_loss_db is None else max_path_loss_db
    return bin_.count >= min_count and bin_.median_measured_db <= ceiling - margin_db


def bin_measurements(
    records: Sequence[MeasurementRecord],
    predictor: Callable[[MeasurementRecord], float],
    margin_db: float = DEFAULT_VALIDITY_MARGIN_DB,
    min_count: int = DEFAULT_MIN_BIN_COUNT,
    workers: int = 1,
) -> list[MeasurementBin]:
    """Group records by geohash-8 and reduce to per-bin medians.

    Predictions are made at each record's own coordinates and reduced with
    the same median as the measurements. The per-bin loss ceiling is the
    minimum EIRP-minus-noise-floor across the bin's records (conservative
    when transmit settings varied).
    """
    if not records:
        raise EmptyInput("no measurement records")
    tx_ids = {r.tx_id for r in records}
    if len(tx_ids) > 1:
        raise MixedTransmitters(f"records mix transmitters: {sorted(tx_ids)}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            predictions = list(pool.map(predictor, records))
    else:
        predictions = [predictor(r) for r in records]

    groups: dict[str, list[int]] = defaultdict(list)
    for i, record in enumerate(records):
        groups[geohash8(record.lat, record.lon)].append(i)

    bins = []
    for geohash in sorted(groups):
        idx = groups[geohash]
        measured = np.array([records[i].pl_measured_db for i in idx])
        predicted = np.array([predictions[i] for i in idx])
        ceiling = min(records[i].max_path_loss_db for i in idx)
        bin_ = MeasurementBin(
            geohash=geohash,
            count=len(idx),
            median_measured_db=float(np.median(measured)),
            median_predicted_db=float(np.median(predicted)),
            max_path_loss_db=ceiling,
            valid=False,
        )
        bins.append(replace(bin_, valid=bin_validity(bin_, margin_db=margin_db, min_count=min_count)))
    return bins


# --- statistics --------------------------------------------------------------------

def _valid_errors(bins: Sequence[MeasurementBin]) -> np.ndarray:
    errors = np.array(
        [b.median_predicted_db - b.median_measured_db for b in bins if b.valid]
    )
    if errors.size == 0:
        raise NoValidBins("no valid bins to aggregate")
    return errors


def rmse(bins: Sequence[MeasurementBin]) -> float:
    """Root mean squared (median measured - median predicted) over valid bins."""
    errors = _valid_errors(bins)
    return float(np.sqrt(np.mean(errors**2)))


def mean_error(bins: Sequence[MeasurementBin]) -> float:
    """Mean signed error over valid bins; positive means overprediction."""
    return float(np.mean(_valid_errors(bins)))


def error_histogram(
    bins: Sequence[MeasurementBin],
    bin_width_db: float = DEFAULT_HISTOGRAM_WIDTH_DB,
) -> tuple[tuple[float, int], ...]:
    """Histogram of per-bin errors; centers are multiples of the width.

    Errors map to the nearest center (ties round half-to-even, keeping
    symmetric inputs symmetric), so an all-zero error set yields a single
    bar at 0.
    """
    if bin_width_db <= 0:
        raise ValueError(f"bin width must be > 0, got {bin_width_db}")
    errors = _valid_errors(bins)
    centers = bin_width_db * np.round(errors / bin_width_db)
    counter: dict[float, int] = defaultdict(int)
    for c in centers:
        counter[float(c) + 0.0] += 1  # +0.0 folds -0.0 into 0.0
    return tuple(sorted(counter.items()))


# --- pipeline ----------------------------------------------------------------------

def make_predictor(
    stack: ElevationStack,
    tx_lat: float,
    tx_lon: float,
    tx_height_m: float,
    config: HybridConfig,
) -> Callable[[MeasurementRecord], float]:
    """Per-record headline path loss at the record's location and rx height."""

    def predictor(record: MeasurementRecord) -> float:
        link = LinkParams(
            frequency_mhz=record.frequency_mhz,
            tx_height_m=tx_height_m,
            rx_height_m=record.rx_height_m,
            tx_lat=tx_lat, tx_lon=tx_lon,
            rx_lat=record.lat, rx_lon=record.lon,
            polarization=config.polarization,
        )
        return predict(stack, link, config).path_loss_db

    return predictor


def validate_measurements(
    records: Sequence[MeasurementRecord],
    stack: ElevationStack,
    tx_lat: float,
    tx_lon: float,
    tx_height_m: float,
    config: HybridConfig | None = None,
    histogram_width_db: float = DEFAULT_HISTOGRAM_WIDTH_DB,
    workers: int = 1,
) -> tuple[ValidationReport, list[MeasurementBin]]:
    """Full pipeline: predict per record, bin, and aggregate the report."""
    config = config or HybridConfig()
    predictor = make_predictor(stack, tx_lat, tx_lon, tx_height_m, config)
    bins = bin_measurements(records, predictor, workers=workers)
    report = ValidationReport(
        rmse_db=rmse(bins),
        mean_error_db=mean_error(bins),
        bin_count_total=len(bins),
        bin_count_valid=sum(1 for b in bins if b.valid),
        histogram=error_histogram(bins, histogram_width_db),
    )
    return report, bins


def sweep_ret_limit(
    records: Sequence[MeasurementRecord],
    stack: ElevationStack,
    tx_lat: float,
    tx_lon: float,
    tx_height_m: float,
    config: HybridConfig | None = None,
    limits_db: Sequence[float] = (),
    workers: int = 1,
) -> list[tuple[float, float]]:
    """RMSE as a function of the foliage-loss clamp.

    Profiles and canopy intersections are computed once; each limit value
    only redoes the clamp arithmetic and the bin statistics.
    """
    if not limits_db:
        raise EmptyInput("no limit values to sweep")
    config = config or HybridConfig()
    base = replace_mode_hybrid(config)

    def components(record: MeasurementRecord) -> tuple[float, float]:
        link = LinkParams(
            frequency_mhz=record.frequency_mhz,
            tx_height_m=tx_height_m,
            rx_height_m=record.rx_height_m,
            tx_lat=tx_lat, tx_lon=tx_lon,
            rx_lat=record.lat, rx_lon=record.lon,
            polarization=base.polarization,
        )
        result = predict(stack, link, base)
        return result.p1812_no_clutter_db, result.ret_loss_raw_db

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(components, records))
    else:
        parts = [components(r) for r in records]

    sweep = []
    for limit in limits_db:
        losses = [no_clutter + clamp_ret(raw, limit) for no_clutter, raw in parts]
        predictor = _precomputed_predictor(records, losses)
        bins = bin_measurements(records, predictor)
        sweep.append((float(limit), rmse(bins)))
    return sweep


def replace_mode_hybrid(config: HybridConfig) -> HybridConfig:
    if config.mode is PredictionMode.HYBRID:
        return config
    return replace(config, mode=PredictionMode.HYBRID)


def _precomputed_predictor(records, losses):
    table = {id(r): loss for r, loss in zip(records, losses)}

    def predictor(record: MeasurementRecord) -> float:
        return table[id(record)]

    return predictor


# --- measurement CSV -----------------------------------------------------------------

def read_measurements_csv(path) -> list[MeasurementRecord]:
    """Read records from CSV with the documented column header."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MEASUREMENT_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise EmptyInput(f"measurement CSV missing columns: {sorted(missing)}")
        records = [
            MeasurementRecord(
                lat=float(row["lat"]),
                lon=float(row["lon"]),
                pl_measured_db=float(row["pl_db"]),
                frequency_mhz=float(row["freq_mhz"]),
                tx_id=row["tx_id"],
                tx_eirp_dbm=float(row["eirp_dbm"]),
                noise_floor_dbm=float(row["noise_floor_dbm"]),
                rx_height_m=float(row["rx_height_m"]),
            )
            for row in reader
        ]
    if not records:
        raise EmptyInput(f"no measurement rows in {path}")
    return records
