"""Sklearn-style transformer wrappers over the core operations.

These are stateless (``fit`` just validates and returns ``self``) but carry
``get_params``/``set_params`` so the pieces compose with sklearn pipelines
and grid search.  Each transformer accepts a single 2-D raster or a stack
of rasters with shape (N, H, W).
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import cost, rate_loss, simulator, srm


def _map_rasters(X, fn):
    X = np.asarray(X)
    if X.ndim == 2:
        return fn(X)
    if X.ndim == 3:
        return np.stack([fn(x) for x in X])
    raise ValueError(f"expected a 2-D raster or a (N, H, W) stack, got shape {X.shape}")


class SrmResiduals(BaseEstimator, TransformerMixin):
    """High-pass residual stacks from the fixed 30-kernel SRM bank.

    With ``absolute=True`` the absolute-valued kernels are used, which is
    the selection-channel form applied to probability maps.
    """

    def __init__(self, absolute=False):
        self.absolute = absolute

    def fit(self, X, y=None):
        _map_rasters(X, lambda x: None)
        return self

    def transform(self, X):
        fn = srm.sca_residuals if self.absolute else srm.residuals
        return _map_rasters(X, fn)


class EmbeddingSimulator(BaseEstimator, TransformerMixin):
    """Probability map -> modification map under seeded uniform noise."""

    def __init__(self, mode="staircase", lam=simulator.DEFAULT_LAMBDA, seed=0):
        self.mode = mode
        self.lam = lam
        self.seed = seed

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        rng_seed = [self.seed]

        def run(pmap):
            noise = simulator.random_field(pmap.shape, rng_seed[0])
            rng_seed[0] += 1
            return simulator.simulate_map(pmap, noise, self.mode, self.lam)

        return _map_rasters(X, run)


class CostConverter(BaseEstimator, TransformerMixin):
    """Probability map -> cost map; ``inverse_transform`` inverts the relation."""

    def __init__(self, clamp_negative=True):
        self.clamp_negative = clamp_negative

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return _map_rasters(X, lambda p: cost.prob_to_cost(p, self.clamp_negative))

    def inverse_transform(self, X):
        return _map_rasters(X, cost.cost_to_prob)


class PayloadCalibrator(BaseEstimator, TransformerMixin):
    """Cost map -> probability map hitting an exact payload (bits per pixel)."""

    def __init__(self, payload=0.4):
        self.payload = payload

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        def run(costs):
            cfg = rate_loss.EmbeddingConfig(costs.shape[0], costs.shape[1], self.payload)
            return cost.calibrate_payload(np.asarray(costs, dtype=np.float64), cfg)

        return _map_rasters(X, run)
