"""Scikit-learn style estimator facade over the hybrid predictor.

Wraps the physics model in the fit/predict protocol so it composes with the
wider ecosystem (metrics, model selection, pipelines operating on coordinate
arrays). There is nothing to learn from data: `fit` binds and validates the
environment, `predict` maps an (n, 2) or (n, 3) array of receiver
coordinates (lat, lon[, rx_height_m]) to path loss in dB.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .elevation import ElevationStack, terrain_height_at
from .hybrid import HybridConfig, PredictionMode, predict
from .p1812 import LinkParams, Polarization
from .profile import ClutterClass
from .ret import LeafState, RetLimit, load_ret_parameters
from .validation import MeasurementRecord, bin_measurements, rmse


def check_coordinates(X) -> np.ndarray:
    """Validate an (n, 2|3) array of (lat, lon[, rx_height_m]) rows."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] not in (2, 3):
        raise ValueError(f"expected 2 or 3 columns (lat, lon[, rx_height]), got {X.shape[1]}")
    if np.any(np.abs(X[:, 0]) > 90.0) or np.any(np.abs(X[:, 1]) > 180.0):
        raise ValueError("coordinates outside [-90, 90] x [-180, 180]")
    if X.shape[1] == 3 and np.any(X[:, 2] <= 0):
        raise ValueError("rx heights must be > 0 m")
    return X


class FoliagePathLoss(RegressorMixin, BaseEstimator):
    """Point-to-multipoint path loss predictor with a foliage term.

    Parameters mirror the model configuration; `stack` is the elevation
    data and `tx` the transmitter as (lat, lon, height_m_agl).

    Example
    -------
    >>> model = FoliagePathLoss(stack=stack, tx=(45.3, -76.1, 16.0))
    >>> model.fit()
    >>> loss_db = model.predict([[45.31, -76.05]])
    """

    def __init__(
        self,
        stack: ElevationStack | None = None,
        tx: tuple[float, float, float] | None = None,
        frequency_mhz: float = 3500.0,
        rx_height_m: float = 2.5,
        mode: str = "hybrid",
        ret_limit_db: float = 20.0,
        clutter_class: str = "urban_trees_forest",
        species: str = "american_plane",
        leaf_state: str = "in_leaf",
        detection_threshold_m: float = 4.0,
        profile_spacing_m: float = 30.0,
        intersection_step_m: float = 1.0,
        polarization: str = "vertical",
    ):
        self.stack = stack
        self.tx = tx
        self.frequency_mhz = frequency_mhz
        self.rx_height_m = rx_height_m
        self.mode = mode
        self.ret_limit_db = ret_limit_db
        self.clutter_class = clutter_class
        self.species = species
        self.leaf_state = leaf_state
        self.detection_threshold_m = detection_threshold_m
        self.profile_spacing_m = profile_spacing_m
        self.intersection_step_m = intersection_step_m
        self.polarization = polarization

    def fit(self, X=None, y=None):
        """Bind the environment; validates stack coverage at the transmitter."""
        if self.stack is None or self.tx is None:
            raise ValueError("stack and tx must be set before fitting")
        tx_lat, tx_lon, tx_height = self.tx
        terrain_height_at(self.stack, tx_lat, tx_lon)  # raises NoCoverage if unset
        self.config_ = HybridConfig(
            mode=PredictionMode(self.mode),
            clutter_class=ClutterClass[self.clutter_class.upper()],
            ret_params=load_ret_parameters(
                species=self.species, leaf_state=LeafState(self.leaf_state)
            ),
            ret_limit=RetLimit(self.ret_limit_db),
            detection_threshold_m=self.detection_threshold_m,
            profile_spacing_m=self.profile_spacing_m,
            intersection_step_m=self.intersection_step_m,
            frequency_mhz=self.frequency_mhz,
            rx_height_m=self.rx_height_m,
            polarization=Polarization(self.polarization),
        )
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        """Path loss (dB) for each (lat, lon[, rx_height_m]) row."""
        check_is_fitted(self, "config_")
        X = check_coordinates(X)
        tx_lat, tx_lon, tx_height = self.tx
        losses = np.empty(len(X))
        for i, row in enumerate(X):
            rx_height = row[2] if X.shape[1] == 3 else self.rx_height_m
            link = LinkParams(
                frequency_mhz=self.frequency_mhz,
                tx_height_m=tx_height,
                rx_height_m=float(rx_height),
                tx_lat=tx_lat, tx_lon=tx_lon,
                rx_lat=float(row[0]), rx_lon=float(row[1]),
                polarization=self.config_.polarization,
            )
            losses[i] = predict(self.stack, link, self.config_).path_loss_db
        return losses

    def rmse_db(self, X, y, tx_eirp_dbm: float = 60.0, noise_floor_dbm: float = -110.0) -> float:
        """Binned validation RMSE against measured losses y (dB).

        Applies the geohash-8 median binning and validity rules rather than
        the raw pointwise residual, matching how drive tests are scored.
        """
        check_is_fitted(self, "config_")
        X = check_coordinates(X)
        y = np.asarray(y, dtype=float)
        records = [
            MeasurementRecord(
                lat=float(row[0]),
                lon=float(row[1]),
                pl_measured_db=float(val),
                frequency_mhz=self.frequency_mhz,
                tx_id="tx",
                tx_eirp_dbm=tx_eirp_dbm,
                noise_floor_dbm=noise_floor_dbm,
                rx_height_m=float(row[2]) if X.shape[1] == 3 else self.rx_height_m,
            )
            for row, val in zip(X, y)
        ]
        predictions = self.predict(X)
        table = dict(zip(map(id, records), predictions))
        bins = bin_measurements(records, lambda r: table[id(r)])
        return rmse(bins)
