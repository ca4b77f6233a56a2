"""Command-line front end.

Subcommands: predict, coverage, profile, ret-curve, validate,
sweep-ret-limit. Settings resolve in the order built-in defaults <
config-file values < command-line flags; a named profile section in the
config file (e.g. the 30 dB heavily-forested preset) slots between the file
defaults and the flags. Every run writes a reproducibility manifest (the
resolved configuration plus SHA-256 checksums of the input files) and a
resolved config file that reproduces the run byte-for-byte when passed back
via --config.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .elevation import ElevationStack, GridKind, apply_tree_growth, load_grid
from .errors import (
    CoordinateOutOfRange,
    DegenerateLink,
    DistanceOutOfRange,
    EmptyInput,
    EmptyRegion,
    FileMissing,
    FoliagePropError,
    FrequencyOutOfRange,
    HeightOutOfRange,
    InvalidProfile,
    MalformedRaster,
    MixedTransmitters,
    NegativeDepth,
    NegativeInput,
    NoCoverage,
    NonpositiveStep,
    NoValidBins,
    PathTooShort,
    ThetaOutOfRange,
    TransformFailure,
    UncalibratedParameters,
    UnitError,
    UsageError,
)
from .geotiff import GridTransform, RasterCRS, write_geotiff
from .hybrid import HybridConfig, PredictionMode, predict, predict_grid
from .p1812 import LinkParams, Polarization
from .profile import ClutterClass, classify_clutter, extract_profile
from .ret import LeafState, RetLimit, load_ret_parameters, ret_curve
from .validation import (
    read_measurements_csv,
    sweep_ret_limit,
    validate_measurements,
)

CONFIG_ENV_VAR = "FOLIAGEPROP_CONFIG"

_DOMAIN_ERRORS = (
    FrequencyOutOfRange, DistanceOutOfRange, HeightOutOfRange, InvalidProfile,
    PathTooShort, DegenerateLink, ThetaOutOfRange, NegativeDepth, NegativeInput,
    NonpositiveStep, CoordinateOutOfRange, EmptyRegion,
)
_DATA_ERRORS = (
    FileMissing, MalformedRaster, UnitError, TransformFailure, NoCoverage,
)
_INPUT_ERRORS = (
    EmptyInput, MixedTransmitters, NoValidBins, UncalibratedParameters,
)

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_DATA = 4
EXIT_INPUT = 5
EXIT_OTHER = 6

_DEFAULTS = {
    "mode": "hybrid",
    "frequency_mhz": 3500.0,
    "rx_height_m": 2.5,
    "ret_limit_db": 20.0,
    "clutter_class": "urban_trees_forest",
    "species": "american_plane",
    "leaf_state": "in_leaf",
    "detection_threshold_m": 4.0,
    "profile_spacing_m": 30.0,
    "intersection_step_m": 1.0,
    "polarization": "vertical",
    "tree_growth_rate_m_per_year": 0.0,
    "survey_year": None,
    "measurement_year": None,
    "dtm": None,
    "dsm": None,
    "fallback_dtm": None,
    "workers": 1,
}

_FLOAT_KEYS = {
    "frequency_mhz", "rx_height_m", "ret_limit_db", "detection_threshold_m",
    "profile_spacing_m", "intersection_step_m", "tree_growth_rate_m_per_year",
}
_INT_KEYS = {"survey_year", "measurement_year", "workers"}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        settings = _resolve_settings(args)
        outdir = Path(args.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        outputs, inputs = args.handler(args, settings, outdir)
        _write_manifest(args.command, settings, inputs, outputs, outdir)
        return 0
    except UsageError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except _DOMAIN_ERRORS as exc:
        _emit_error(exc)
        return EXIT_DOMAIN
    except _DATA_ERRORS as exc:
        _emit_error(exc)
        return EXIT_DATA
    except _INPUT_ERRORS as exc:
        _emit_error(exc)
        return EXIT_INPUT
    except FoliagePropError as exc:
        _emit_error(exc)
        return EXIT_OTHER


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)


# --- argument parsing -----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foliageprop",
        description="Hybrid terrain + foliage RF path loss prediction",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--config", help="config file (INI); also via $" + CONFIG_ENV_VAR)
        p.add_argument("--preset", help="named profile section of the config file")
        p.add_argument("--output-dir", default=".", help="directory for result files")
        p.add_argument("--dtm", help="terrain raster (GeoTIFF)")
        p.add_argument("--dsm", help="surface raster (GeoTIFF)")
        p.add_argument("--fallback-dtm", dest="fallback_dtm", help="coarse terrain raster")
        p.add_argument("--mode", choices=[m.value for m in PredictionMode])
        p.add_argument("--freq", dest="frequency_mhz", type=float, help="frequency (MHz)")
        p.add_argument("--rx-height", dest="rx_height_m", type=float)
        p.add_argument("--ret-limit", dest="ret_limit_db", type=float)
        p.add_argument("--clutter-class", dest="clutter_class",
                       choices=[c.name.lower() for c in ClutterClass])
        p.add_argument("--species")
        p.add_argument("--leaf-state", dest="leaf_state",
                       choices=[s.value for s in LeafState])
        p.add_argument("--detection-threshold", dest="detection_threshold_m", type=float)
        p.add_argument("--profile-spacing", dest="profile_spacing_m", type=float)
        p.add_argument("--intersection-step", dest="intersection_step_m", type=float)
        p.add_argument("--polarization", choices=[p_.value for p_ in Polarization])
        p.add_argument("--tree-growth-rate", dest="tree_growth_rate_m_per_year", type=float,
                       help="m/year subtracted from clutter for survey/measurement year gap")
        p.add_argument("--survey-year", dest="survey_year", type=int)
        p.add_argument("--measurement-year", dest="measurement_year", type=int)
        p.add_argument("--workers", type=int, help="parallel evaluation workers")

    p = sub.add_parser("predict", help="single point-to-point prediction (JSON)")
    add_common(p)
    p.add_argument("--tx", required=True, help="lat,lon,height_m")
    p.add_argument("--rx", required=True, help="lat,lon,height_m")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("coverage", help="prediction grid over a region (CSV + raster)")
    add_common(p)
    p.add_argument("--tx", required=True, help="lat,lon,height_m")
    p.add_argument("--region", required=True, help="lat_min,lat_max,lon_min,lon_max")
    p.add_argument("--resolution", type=float, required=True, help="cell size (m)")
    p.add_argument("--raster", action="store_true", help="also write a GeoTIFF of path loss")
    p.set_defaults(handler=_cmd_coverage)

    p = sub.add_parser("profile", help="terrain/clutter profile between two points (CSV)")
    add_common(p)
    p.add_argument("--tx", required=True, help="lat,lon[,height_m]")
    p.add_argument("--rx", required=True, help="lat,lon[,height_m]")
    p.set_defaults(handler=_cmd_profile)

    p = sub.add_parser("ret-curve", help="foliage loss versus depth (CSV)")
    add_common(p)
    p.add_argument("--theta", type=float, default=0.0, help="incidence angle (deg)")
    p.add_argument("--max-depth", type=float, default=100.0, help="max depth (m)")
    p.add_argument("--step", type=float, default=1.0, help="depth step (m)")
    p.set_defaults(handler=_cmd_ret_curve)

    p = sub.add_parser("validate", help="score predictions against drive-test CSV")
    add_common(p)
    p.add_argument("--measurements", required=True, help="measurement CSV")
    p.add_argument("--tx", required=True, help="lat,lon,height_m")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("sweep-ret-limit", help="RMSE for a range of foliage-loss limits")
    add_common(p)
    p.add_argument("--measurements", required=True, help="measurement CSV")
    p.add_argument("--tx", required=True, help="lat,lon,height_m")
    p.add_argument("--limits", required=True, help="comma-separated limits in dB")
    p.set_defaults(handler=_cmd_sweep)

    return parser


# --- settings resolution ----------------------------------------------------------

def _resolve_settings(args) -> dict:
    settings = dict(_DEFAULTS)

    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        if not os.path.exists(config_path):
            raise UsageError(f"config file not found: {config_path}")
        parser = configparser.ConfigParser()
        parser.read(config_path)
        if parser.has_section("model"):
            _apply_section(settings, parser["model"])
        if parser.has_section("data"):
            _apply_section(settings, parser["data"])
        if args.preset:
            section = f"profile.{args.preset}"
            if not parser.has_section(section):
                raise UsageError(f"config file has no [{section}] section")
            _apply_section(settings, parser[section])
    elif args.preset:
        presets = {"semi-rural": 20.0, "heavily-forested": 30.0}
        if args.preset not in presets:
            raise UsageError(
                f"unknown preset {args.preset!r} (built-ins: {sorted(presets)})"
            )
        settings["ret_limit_db"] = presets[args.preset]

    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _apply_section(settings: dict, section) -> None:
    for key, value in section.items():
        if key not in _DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        if key in _FLOAT_KEYS:
            settings[key] = float(value)
        elif key in _INT_KEYS:
            settings[key] = int(value)
        else:
            settings[key] = value


def _hybrid_config(settings: dict) -> HybridConfig:
    return HybridConfig(
        mode=PredictionMode(settings["mode"]),
        clutter_class=ClutterClass[settings["clutter_class"].upper()],
        ret_params=load_ret_parameters(
            species=settings["species"], leaf_state=LeafState(settings["leaf_state"])
        ),
        ret_limit=RetLimit(settings["ret_limit_db"]),
        detection_threshold_m=settings["detection_threshold_m"],
        profile_spacing_m=settings["profile_spacing_m"],
        intersection_step_m=settings["intersection_step_m"],
        frequency_mhz=settings["frequency_mhz"],
        rx_height_m=settings["rx_height_m"],
        polarization=Polarization(settings["polarization"]),
    )


def _load_stack(settings: dict) -> ElevationStack:
    if not settings["dtm"] or not settings["dsm"]:
        raise UsageError("this command needs --dtm and --dsm rasters")
    stack = ElevationStack(
        dtm=load_grid(settings["dtm"], GridKind.TERRAIN),
        dsm=load_grid(settings["dsm"], GridKind.SURFACE),
        fallback_dtm=(
            load_grid(settings["fallback_dtm"], GridKind.TERRAIN)
            if settings["fallback_dtm"] else None
        ),
    )
    survey, measured = settings["survey_year"], settings["measurement_year"]
    if survey is not None and measured is not None:
        years = max(survey - measured, 0)
        stack = apply_tree_growth(stack, settings["tree_growth_rate_m_per_year"], years)
    return stack


def _raster_inputs(settings: dict) -> list[str]:
    return [settings[k] for k in ("dtm", "dsm", "fallback_dtm") if settings[k]]


def _parse_point(text: str, want_height: bool) -> tuple:
    parts = text.split(",")
    expected = 3 if want_height else (2, 3)
    ok = len(parts) == expected if want_height else len(parts) in expected
    if not ok:
        raise UsageError(f"expected lat,lon{',height' if want_height else '[,height]'}: {text!r}")
    try:
        values = tuple(float(v) for v in parts)
    except ValueError:
        raise UsageError(f"unparseable coordinates: {text!r}")
    return values


# --- subcommand handlers -----------------------------------------------------------

def _cmd_predict(args, settings, outdir: Path):
    stack = _load_stack(settings)
    config = _hybrid_config(settings)
    tx = _parse_point(args.tx, want_height=True)
    rx = _parse_point(args.rx, want_height=True)
    link = LinkParams(
        frequency_mhz=settings["frequency_mhz"],
        tx_height_m=tx[2], rx_height_m=rx[2],
        tx_lat=tx[0], tx_lon=tx[1], rx_lat=rx[0], rx_lon=rx[1],
        polarization=config.polarization,
    )
    result = predict(stack, link, config)
    payload = json.dumps(result.as_dict(), indent=2)
    print(payload)
    out = outdir / "prediction.json"
    out.write_text(payload + "\n")
    return [out], _raster_inputs(settings)


def _cmd_coverage(args, settings, outdir: Path):
    stack = _load_stack(settings)
    config = _hybrid_config(settings)
    tx = _parse_point(args.tx, want_height=True)
    region = tuple(float(v) for v in args.region.split(","))
    if len(region) != 4:
        raise UsageError(f"expected lat_min,lat_max,lon_min,lon_max: {args.region!r}")
    grid = predict_grid(
        stack, tx[0], tx[1], tx[2], region, args.resolution,
        config=config, workers=settings["workers"],
    )

    out_csv = outdir / "coverage.csv"
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lat", "lon", "path_loss_db", "foliage_depth_m"])
        for i, lat in enumerate(grid.lats):
            for j, lon in enumerate(grid.lons):
                if grid.out_of_domain[i, j]:
                    writer.writerow([f"{lat:.6f}", f"{lon:.6f}", "", ""])
                else:
                    writer.writerow([
                        f"{lat:.6f}", f"{lon:.6f}",
                        f"{grid.path_loss_db[i, j]:.3f}",
                        f"{grid.foliage_depth_m[i, j]:.2f}",
                    ])
    outputs = [out_csv]

    if args.raster:
        dlat = float(grid.lats[0] - grid.lats[1]) if len(grid.lats) > 1 else 1e-4
        dlon = float(grid.lons[1] - grid.lons[0]) if len(grid.lons) > 1 else 1e-4
        transform = GridTransform(
            origin_x=float(grid.lons[0]) - dlon / 2.0,
            origin_y=float(grid.lats[0]) + dlat / 2.0,
            scale_x=dlon, scale_y=dlat,
        )
        out_tif = outdir / "coverage.tif"
        data = np.where(grid.out_of_domain, -9999.0, grid.path_loss_db)
        write_geotiff(out_tif, data, RasterCRS.from_epsg(4326), transform, nodata=-9999.0)
        outputs.append(out_tif)

    print(f"coverage: {grid.path_loss_db.shape[0]}x{grid.path_loss_db.shape[1]} cells "
          f"({int(grid.out_of_domain.sum())} out of domain) -> {out_csv}")
    return outputs, _raster_inputs(settings)


def _cmd_profile(args, settings, outdir: Path):
    stack = _load_stack(settings)
    tx = _parse_point(args.tx, want_height=False)
    rx = _parse_point(args.rx, want_height=False)
    raw = extract_profile(stack, tx[0], tx[1], rx[0], rx[1],
                          max_spacing_m=settings["profile_spacing_m"])
    classified = classify_clutter(
        raw, ClutterClass[settings["clutter_class"].upper()],
        settings["detection_threshold_m"],
    )
    out = outdir / "profile.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["distance_km", "terrain_m", "raw_clutter_m", "representative_clutter_m"])
        for k in range(raw.n_points):
            writer.writerow([
                f"{raw.distances_km[k]:.6f}", f"{raw.terrain_m[k]:.3f}",
                f"{raw.clutter_m[k]:.3f}", f"{classified.clutter_m[k]:.1f}",
            ])
    print(f"profile: {raw.n_points} points, {raw.length_km:.3f} km, "
          f"spacing {raw.spacing_m:.2f} m -> {out}")
    return [out], _raster_inputs(settings)


def _cmd_ret_curve(args, settings, outdir: Path):
    params = load_ret_parameters(
        species=settings["species"], leaf_state=LeafState(settings["leaf_state"])
    )
    curve = ret_curve(params, args.theta, args.max_depth, args.step)
    out = outdir / "ret_curve.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth_m", "loss_db"])
        for depth, loss in curve:
            writer.writerow([f"{depth:.3f}", f"{loss:.4f}"])
    print(f"ret-curve: {len(curve)} samples at theta={args.theta} deg -> {out}")
    return [out], []


def _cmd_validate(args, settings, outdir: Path):
    stack = _load_stack(settings)
    config = _hybrid_config(settings)
    tx = _parse_point(args.tx, want_height=True)
    records = read_measurements_csv(args.measurements)
    report, bins = validate_measurements(
        records, stack, tx[0], tx[1], tx[2], config, workers=settings["workers"],
    )

    out_report = outdir / "report.json"
    out_report.write_text(json.dumps(dataclasses.asdict(report), indent=2) + "\n")

    out_bins = outdir / "bins.csv"
    with open(out_bins, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["geohash", "count", "median_measured_db", "median_predicted_db", "valid"])
        for b in bins:
            writer.writerow([b.geohash, b.count, f"{b.median_measured_db:.3f}",
                             f"{b.median_predicted_db:.3f}", int(b.valid)])

    out_hist = outdir / "histogram.csv"
    with open(out_hist, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["error_bin_center_db", "frequency"])
        for center, count in report.histogram:
            writer.writerow([f"{center:.1f}", count])

    print(f"validate: rmse={report.rmse_db:.2f} dB mean_error={report.mean_error_db:+.2f} dB "
          f"bins={report.bin_count_valid}/{report.bin_count_total} valid -> {out_report}")
    return [out_report, out_bins, out_hist], _raster_inputs(settings) + [args.measurements]


def _cmd_sweep(args, settings, outdir: Path):
    stack = _load_stack(settings)
    config = _hybrid_config(settings)
    tx = _parse_point(args.tx, want_height=True)
    try:
        limits = [float(v) for v in args.limits.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"unparseable limits list: {args.limits!r}")
    records = read_measurements_csv(args.measurements)
    sweep = sweep_ret_limit(
        records, stack, tx[0], tx[1], tx[2], config, limits,
        workers=settings["workers"],
    )
    out = outdir / "sweep.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["limit_db", "rmse_db"])
        for limit, value in sweep:
            writer.writerow([f"{limit:.1f}", f"{value:.6f}"])
    best = min(sweep, key=lambda t: t[1])
    print(f"sweep-ret-limit: {len(sweep)} points, best rmse={best[1]:.2f} dB "
          f"at {best[0]:.1f} dB -> {out}")
    return [out], _raster_inputs(settings) + [args.measurements]


# --- manifest ------------------------------------------------------------------------

def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(command, settings, inputs, outputs, outdir: Path) -> None:
    resolved = outdir / "resolved_config.ini"
    parser = configparser.ConfigParser()
    parser["model"] = {
        k: str(v) for k, v in settings.items()
        if v is not None and k not in ("dtm", "dsm", "fallback_dtm")
    }
    parser["data"] = {
        k: str(settings[k]) for k in ("dtm", "dsm", "fallback_dtm") if settings[k]
    }
    with open(resolved, "w") as fh:
        parser.write(fh)

    manifest = {
        "command": command,
        "settings": {k: settings[k] for k in sorted(settings)},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "resolved_config": str(resolved),
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
