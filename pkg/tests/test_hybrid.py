import numpy as np
import pytest

from foliageprop.errors import EmptyRegion
from foliageprop.hybrid import (
    HybridConfig,
    PredictionMode,
    PredictionResult,
    predict,
    predict_grid,
)
from foliageprop.p1812 import LinkParams
from foliageprop.ret import RetLimit

from conftest import ANCHOR_LAT, ANCHOR_LON, east_of


def make_link(stack_anchor_m=3000.0, f_mhz=3500.0, htg=16.0, hrg=2.5):
    rx = east_of(ANCHOR_LAT, ANCHOR_LON, stack_anchor_m)
    return LinkParams(
        frequency_mhz=f_mhz, tx_height_m=htg, rx_height_m=hrg,
        tx_lat=ANCHOR_LAT, tx_lon=ANCHOR_LON, rx_lat=rx[0], rx_lon=rx[1],
    )


class TestCombination:
    def test_arithmetic_identity(self):
        # 100 dB terrain term, 45 dB raw foliage, 20 dB limit -> 120 dB
        result = PredictionResult(
            mode=PredictionMode.HYBRID,
            path_loss_db=120.0,
            p1812_no_clutter_db=100.0,
            p1812_with_clutter_db=None,
            ret_loss_raw_db=45.0,
            ret_loss_clamped_db=20.0,
            foliage_depth_m=40.0,
            theta_deg=5.0,
            path_length_km=1.0,
            n_profile_points=35,
        )
        assert result.path_loss_db == result.p1812_no_clutter_db + result.ret_loss_clamped_db

    def test_identity_enforced(self):
        with pytest.raises(ValueError):
            PredictionResult(
                mode=PredictionMode.HYBRID,
                path_loss_db=119.0,
                p1812_no_clutter_db=100.0,
                p1812_with_clutter_db=None,
                ret_loss_raw_db=45.0,
                ret_loss_clamped_db=20.0,
                foliage_depth_m=40.0,
                theta_deg=5.0,
                path_length_km=1.0,
                n_profile_points=35,
            )

    def test_unobstructed_ray_collapses_to_no_clutter(self, flat_stack):
        result = predict(flat_stack, make_link(), HybridConfig())
        assert result.foliage_depth_m == 0.0
        assert result.ret_loss_raw_db == 0.0
        assert result.path_loss_db == result.p1812_no_clutter_db
        assert result.theta_deg is None

    def test_forested_path_adds_clamped_term(self, forest_stack):
        result = predict(forest_stack, make_link(), HybridConfig())
        assert result.foliage_depth_m > 0.0
        assert result.ret_loss_raw_db > 0.0
        assert result.ret_loss_clamped_db == min(result.ret_loss_raw_db, 20.0)
        assert result.path_loss_db == result.p1812_no_clutter_db + result.ret_loss_clamped_db

    def test_no_clutter_mode(self, forest_stack):
        config = HybridConfig(mode=PredictionMode.P1812_NO_CLUTTER)
        result = predict(forest_stack, make_link(), config)
        assert result.path_loss_db == result.p1812_no_clutter_db
        assert result.ret_loss_raw_db == 0.0
        assert result.ret_loss_clamped_db == 0.0
        assert result.foliage_depth_m == 0.0

    def test_clutter_baseline_mode(self, forest_stack):
        config = HybridConfig(mode=PredictionMode.P1812_CLUTTER)
        result = predict(forest_stack, make_link(), config)
        assert result.p1812_with_clutter_db is not None
        assert result.path_loss_db == result.p1812_with_clutter_db
        assert result.path_loss_db >= result.p1812_no_clutter_db - 1e-9

    def test_monotone_in_limit(self, forest_stack):
        losses = []
        raws = []
        for limit in (0.0, 5.0, 10.0, 20.0, 30.0, 200.0):
            config = HybridConfig(ret_limit=RetLimit(limit))
            result = predict(forest_stack, make_link(), config)
            losses.append(result.path_loss_db)
            raws.append(result.ret_loss_raw_db)
        assert all(b >= a - 1e-12 for a, b in zip(losses, losses[1:]))
        # constant once the limit passes the raw loss
        raw = raws[0]
        saturated = [l for lim, l in zip((0.0, 5.0, 10.0, 20.0, 30.0, 200.0), losses) if lim >= raw]
        assert len(set(saturated)) <= 1

    def test_limit_zero_collapses(self, forest_stack):
        config = HybridConfig(ret_limit=RetLimit(0.0))
        result = predict(forest_stack, make_link(), config)
        assert result.path_loss_db == result.p1812_no_clutter_db

    def test_never_below_no_clutter_baseline(self, forest_stack):
        for limit in (0.0, 10.0, 30.0):
            result = predict(forest_stack, make_link(), HybridConfig(ret_limit=RetLimit(limit)))
            assert result.path_loss_db >= result.p1812_no_clutter_db

    def test_defaults(self):
        config = HybridConfig()
        assert config.ret_limit.limit_db == 20.0
        assert config.profile_spacing_m == 30.0
        assert config.environment.p == 50.0
        assert config.environment.pl == 50.0
        assert RetLimit.heavily_forested().limit_db == 30.0

    def test_as_dict_roundtrips_json(self, forest_stack):
        import json
        result = predict(forest_stack, make_link(), HybridConfig())
        payload = json.loads(json.dumps(result.as_dict()))
        assert payload["path_loss_db"] == result.path_loss_db
        assert payload["mode"] == "hybrid"

    def test_no_clutter_term_matches_direct_engine_run(self, forest_stack):
        # cross-module equivalence: the stripped-profile engine run is the
        # same number the combined predictor uses as its terrain term
        from foliageprop.p1812 import ModelEnvironment, path_loss_p1812
        from foliageprop.profile import classify_clutter, extract_profile, strip_clutter

        link = make_link()
        result = predict(forest_stack, link, HybridConfig())
        raw = extract_profile(forest_stack, link.tx_lat, link.tx_lon,
                              link.rx_lat, link.rx_lon)
        direct = path_loss_p1812(strip_clutter(classify_clutter(raw)), link,
                                 ModelEnvironment())
        assert result.p1812_no_clutter_db == direct


class TestFallbackFlag:
    def test_fallback_only_segments_flagged_and_contribute_zero_foliage(self):
        from conftest import make_geo_grid
        from foliageprop.elevation import ElevationStack, GridKind

        # high-res pair with a nodata hole mid-path; coarse fallback covers all
        shape = (300, 500)
        terrain = np.full(shape, 100.0)
        surface = terrain + 18.0  # canopy everywhere the pair covers
        hole = slice(0, shape[0]), slice(140, 180)  # lon band inside the path
        terrain_h = terrain.copy()
        terrain_h[hole] = -9999.0
        surface_h = surface.copy()
        surface_h[hole] = -9999.0

        dtm = make_geo_grid(GridKind.TERRAIN, terrain_h, cell_deg=0.001)
        dsm = make_geo_grid(GridKind.SURFACE, surface_h, cell_deg=0.001)
        fallback = make_geo_grid(GridKind.TERRAIN, np.full((40, 60), 100.0),
                                 lat_max=45.6, lon_min=-76.4, cell_deg=0.02)
        stack = ElevationStack(dtm=dtm, dsm=dsm, fallback_dtm=fallback)

        result = predict(stack, make_link(6000.0), HybridConfig())
        assert result.used_fallback_terrain

        full = ElevationStack(
            dtm=make_geo_grid(GridKind.TERRAIN, terrain, cell_deg=0.001),
            dsm=make_geo_grid(GridKind.SURFACE, surface, cell_deg=0.001),
        )
        reference = predict(full, make_link(6000.0), HybridConfig())
        assert not reference.used_fallback_terrain
        # the hole contributes no foliage depth
        assert result.foliage_depth_m < reference.foliage_depth_m


class TestGrid:
    REGION = (45.32, 45.34, -76.08, -76.05)

    def test_single_cell_matches_point_prediction(self, flat_stack):
        lat_c = 45.33
        lon_c = -76.065
        half_lat = 0.00045
        half_lon = 0.00064
        region = (lat_c - half_lat, lat_c + half_lat, lon_c - half_lon, lon_c + half_lon)
        grid = predict_grid(flat_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, region, 100.0)
        assert grid.path_loss_db.shape == (1, 1)
        link = LinkParams(
            frequency_mhz=3500.0, tx_height_m=16.0, rx_height_m=2.5,
            tx_lat=ANCHOR_LAT, tx_lon=ANCHOR_LON,
            rx_lat=float(grid.lats[0]), rx_lon=float(grid.lons[0]),
        )
        point = predict(flat_stack, link, HybridConfig())
        assert grid.path_loss_db[0, 0] == point.path_loss_db

    def test_flat_region_equals_no_clutter_grid(self, flat_stack):
        grid = predict_grid(flat_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, self.REGION, 500.0)
        ok = ~grid.out_of_domain
        assert np.array_equal(grid.path_loss_db[ok], grid.p1812_no_clutter_db[ok])
        assert np.all(grid.foliage_depth_m[ok] == 0.0)

    def test_cells_inside_floor_marked_out_of_domain(self, flat_stack):
        region = (ANCHOR_LAT - 0.002, ANCHOR_LAT + 0.002, ANCHOR_LON - 0.003, ANCHOR_LON + 0.003)
        grid = predict_grid(flat_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, region, 100.0)
        assert grid.out_of_domain.any()
        assert np.isnan(grid.path_loss_db[grid.out_of_domain]).all()

    def test_serial_and_concurrent_identical(self, forest_stack):
        serial = predict_grid(forest_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, self.REGION, 500.0,
                              workers=1)
        threaded = predict_grid(forest_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, self.REGION, 500.0,
                                workers=4)
        assert np.array_equal(serial.path_loss_db, threaded.path_loss_db, equal_nan=True)
        assert np.array_equal(serial.out_of_domain, threaded.out_of_domain)

    def test_rerun_bit_identical(self, forest_stack):
        a = predict_grid(forest_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, self.REGION, 500.0)
        b = predict_grid(forest_stack, ANCHOR_LAT, ANCHOR_LON, 16.0, self.REGION, 500.0)
        assert np.array_equal(a.path_loss_db, b.path_loss_db, equal_nan=True)

    def test_empty_region(self, flat_stack):
        with pytest.raises(EmptyRegion):
            predict_grid(flat_stack, ANCHOR_LAT, ANCHOR_LON, 16.0,
                         (45.34, 45.32, -76.08, -76.05), 100.0)
        with pytest.raises(EmptyRegion):
            predict_grid(flat_stack, ANCHOR_LAT, ANCHOR_LON, 16.0,
                         (45.32, 45.3201, -76.08, -76.0799), 5000.0)
