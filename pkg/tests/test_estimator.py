import numpy as np
import pytest
from sklearn.base import clone

from foliageprop.estimator import FoliagePathLoss, check_coordinates
from foliageprop.hybrid import HybridConfig, predict
from foliageprop.p1812 import LinkParams

from conftest import ANCHOR_LAT, ANCHOR_LON, east_of, make_flat_stack


@pytest.fixture(scope="module")
def stack():
    return make_flat_stack()


@pytest.fixture
def model(stack):
    return FoliagePathLoss(stack=stack, tx=(ANCHOR_LAT, ANCHOR_LON, 16.0)).fit()


class TestSklearnProtocol:
    def test_get_set_params_roundtrip(self, stack):
        model = FoliagePathLoss(stack=stack, tx=(ANCHOR_LAT, ANCHOR_LON, 16.0))
        params = model.get_params()
        assert params["frequency_mhz"] == 3500.0
        assert params["ret_limit_db"] == 20.0
        model.set_params(ret_limit_db=30.0, frequency_mhz=700.0)
        assert model.ret_limit_db == 30.0
        assert model.frequency_mhz == 700.0

    def test_clone(self, stack):
        model = FoliagePathLoss(stack=stack, tx=(ANCHOR_LAT, ANCHOR_LON, 16.0),
                                ret_limit_db=30.0)
        copy = clone(model)  # deep-copies non-estimator params per sklearn semantics
        assert copy.ret_limit_db == 30.0
        assert copy.tx == model.tx
        rx = east_of(ANCHOR_LAT, ANCHOR_LON, 2000.0)
        assert copy.fit().predict([[*rx]])[0] == model.fit().predict([[*rx]])[0]

    def test_unfitted_predict_raises(self, stack):
        model = FoliagePathLoss(stack=stack, tx=(ANCHOR_LAT, ANCHOR_LON, 16.0))
        with pytest.raises(Exception):
            model.predict([[45.31, -76.05]])

    def test_fit_requires_stack_and_tx(self):
        with pytest.raises(ValueError):
            FoliagePathLoss().fit()


class TestPredict:
    def test_matches_functional_api(self, model, stack):
        rx = east_of(ANCHOR_LAT, ANCHOR_LON, 2000.0)
        losses = model.predict([[rx[0], rx[1]]])
        link = LinkParams(
            frequency_mhz=3500.0, tx_height_m=16.0, rx_height_m=2.5,
            tx_lat=ANCHOR_LAT, tx_lon=ANCHOR_LON, rx_lat=rx[0], rx_lon=rx[1],
        )
        expected = predict(stack, link, HybridConfig()).path_loss_db
        assert losses[0] == expected

    def test_vector_shapes(self, model):
        rxs = [east_of(ANCHOR_LAT, ANCHOR_LON, m) for m in (1000.0, 2000.0, 3000.0)]
        X = np.array([[la, lo] for la, lo in rxs])
        losses = model.predict(X)
        assert losses.shape == (3,)
        assert np.all(np.isfinite(losses))

    def test_per_row_rx_height(self, model):
        rx = east_of(ANCHOR_LAT, ANCHOR_LON, 2000.0)
        low, high = model.predict([[rx[0], rx[1], 2.5], [rx[0], rx[1], 10.0]])
        assert low != high

    def test_rmse_score(self, model):
        rng = np.random.default_rng(61)
        rxs = []
        for m in np.linspace(1000.0, 4000.0, 20):
            la, lo = east_of(ANCHOR_LAT, ANCHOR_LON, float(m))
            rxs.extend([[la, lo]] * 3)
        X = np.array(rxs)
        y = model.predict(X) + rng.normal(0.0, 1.0, len(X))
        value = model.rmse_db(X, y, tx_eirp_dbm=60.0, noise_floor_dbm=-200.0)
        assert 0.0 <= value < 3.0


class TestCheckCoordinates:
    def test_accepts_2_or_3_columns(self):
        assert check_coordinates([[45.3, -76.1]]).shape == (1, 2)
        assert check_coordinates([[45.3, -76.1, 2.5]]).shape == (1, 3)

    def test_rejects_bad_shapes_and_ranges(self):
        with pytest.raises(ValueError):
            check_coordinates([[1.0]])
        with pytest.raises(ValueError):
            check_coordinates([[95.0, 0.0]])
        with pytest.raises(ValueError):
            check_coordinates([[45.0, -76.0, -2.0]])
