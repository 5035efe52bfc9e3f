"""scikit-learn style wrappers.

Point clouds are ``(n_samples, n_features)`` arrays in a continuous space
whose metric is chosen by name. The transformers here change the number of
rows (they act on sets, not on individual samples), so they belong at the
end of a pipeline or outside one.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import hyperspace as hs
from .engine import SIFS, hutchinson_apply, iterate_attractor
from .maps import ContractionMap
from .metric import MetricSpace
from .suzuki import classify


def _as_maps(maps):
    return [m if isinstance(m, ContractionMap) else ContractionMap.from_dict(m) for m in maps]


class _SpaceMixin:
    def _validate(self, X, reset):
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        if reset:
            self.n_features_in_ = X.shape[1]
            self.space_ = MetricSpace(self.metric, dimension=X.shape[1])
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} is expecting {self.n_features_in_}"
            )
        return X


class HutchinsonTransformer(_SpaceMixin, TransformerMixin, BaseEstimator):
    """Apply the Hutchinson operator of a set of maps to a point cloud.

    ``fit`` validates the maps as a Suzuki IFS on the training points;
    ``transform`` returns the quantized union of the images of ``X``.
    """

    def __init__(self, maps=(), metric="euclidean", resolution=1e-3):
        self.maps = maps
        self.metric = metric
        self.resolution = resolution

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        self.system_ = SIFS.build(self.space_, _as_maps(self.maps), resolution=self.resolution, sample=X)
        self.factors_ = np.asarray(self.system_.factors)
        return self

    def transform(self, X):
        check_is_fitted(self, "system_")
        X = self._validate(X, reset=False)
        return hutchinson_apply(self.system_, X).points


class SIFSAttractor(_SpaceMixin, TransformerMixin, BaseEstimator):
    """Attractor of a Suzuki IFS, computed from the fitted points as the seed.

    After ``fit``: ``attractor_`` (points), ``trace_``, ``certificate_`` and
    ``n_iter_``. ``transform`` gives each row's distance to the attractor and
    ``score`` is the negative Hausdorff distance between ``X`` and it.
    """

    def __init__(self, maps=(), metric="euclidean", resolution=1e-3, tol=None, max_iter=100):
        self.maps = maps
        self.metric = metric
        self.resolution = resolution
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        self.system_ = SIFS.build(self.space_, _as_maps(self.maps), resolution=self.resolution, sample=X)
        tol = self.tol if self.tol is not None else 2 * self.resolution
        F, self.trace_, self.certificate_ = iterate_attractor(self.system_, X, tol, self.max_iter)
        self.attractor_set_ = F
        self.attractor_ = F.points
        self.n_iter_ = self.trace_.n_iter
        return self

    def transform(self, X):
        check_is_fitted(self, "attractor_set_")
        X = self._validate(X, reset=False)
        keys, rows = np.unique(np.rint(X / self.resolution).astype(np.int64), axis=0, return_inverse=True)
        A = hs.CompactSet(keys, self.resolution)
        near = hs.nearest_distances(self.space_, A, self.attractor_set_)
        return near[rows.reshape(-1)][:, None]

    def score(self, X, y=None):
        check_is_fitted(self, "attractor_set_")
        X = self._validate(X, reset=False)
        A = hs.CompactSet.from_points(self.space_, X, self.resolution)
        return -hs.fast_hausdorff(self.space_, A, self.attractor_set_)


class SuzukiMapAnalyzer(_SpaceMixin, BaseEstimator):
    """Classify one map on the training points as a Banach, Suzuki-only or neither contraction."""

    def __init__(self, map=None, metric="euclidean"):
        self.map = map
        self.metric = metric

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        tmap = self.map if isinstance(self.map, ContractionMap) else ContractionMap.from_dict(self.map)
        self.report_ = classify(self.space_, tmap, X, sampling=f"fit:{len(X)}")
        self.verdict_ = self.report_.verdict
        self.minimal_m_banach_ = self.report_.minimal_m_banach
        self.minimal_m_suzuki_ = self.report_.minimal_m_suzuki
        return self
