"""Random-forest regressor for per-phoneme rating prediction.

Standard bagged CART regression: each tree is grown on a bootstrap resample
(n draws with replacement) with a fresh random feature subset at every node
(default ceil(d/3) candidates), exact midpoint splits minimizing the summed
child squared error, and leaf means as predictions. The forest prediction is
the plain average over trees, so it always stays within the training target
range.

Randomness is fully keyed: tree i of a forest draws from a splitmix64 stream
seeded with `seed XOR fnv1a64(f"{stream_label}|tree:{i}")`. Two fits with the
same data, parameters, seed, and label are identical — on any machine, under
any parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import _kernels
from .rng import derive_seed


def tree_seeds(seed: int, stream_label: str, n_trees: int) -> np.ndarray:
    """The per-tree stream seeds a forest will use, as uint64."""
    return np.array(
        [derive_seed(seed, f"{stream_label}|tree:{i}") for i in range(n_trees)],
        dtype=np.uint64,
    )


class RatingForestRegressor(RegressorMixin, BaseEstimator):
    """Deterministic random-forest regressor (see module docstring).

    Parameters
    ----------
    n_trees : number of trees (default 100).
    max_features : candidate features per node; None means ceil(d/3),
        values above d are clamped to d.
    min_leaf : a node with at most this many instances becomes a leaf
        (default 5). Children of a split may be smaller.
    max_depth : depth limit; None means unlimited.
    seed : 64-bit master seed.
    stream_label : prefix naming this forest's random stream, conventionally
        "<symptom>|<phoneme>" when fit inside the evaluation grid.
    """

    def __init__(self, n_trees: int = 100, max_features: int | None = None,
                 min_leaf: int = 5, max_depth: int | None = None,
                 seed: int = 0, stream_label: str = ""):
        self.n_trees = n_trees
        self.max_features = max_features
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.seed = seed
        self.stream_label = stream_label

    def _validated_params(self, d: int) -> tuple[int, int, int]:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_features is None:
            max_features = math.ceil(d / 3)
        else:
            if self.max_features < 1:
                raise ValueError(f"max_features must be >= 1, got {self.max_features}")
            max_features = min(self.max_features, d)
        if self.max_depth is None:
            max_depth = -1
        else:
            if self.max_depth < 1:
                raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
            max_depth = self.max_depth
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        return max_features, self.min_leaf, max_depth

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, ensure_min_samples=1)
        n, d = X.shape
        max_features, min_leaf, max_depth = self._validated_params(d)

        xt = np.ascontiguousarray(X.T)
        sorted_pos = np.empty((d, n), dtype=np.int32)
        for f in range(d):
            sorted_pos[f] = np.argsort(xt[f], kind="stable")
        seeds = tree_seeds(self.seed, self.stream_label, self.n_trees)

        feat, thr, left, right, value, offsets = _kernels.grow_forest(
            xt, np.ascontiguousarray(y, dtype=np.float64), sorted_pos, seeds,
            np.int64(max_features), np.int64(min_leaf), np.int64(max_depth))
        self.n_features_in_ = d
        self.max_features_ = max_features
        self.target_range_ = (float(y.min()), float(y.max()))
        self.feat_ = feat
        self.thr_ = thr
        self.left_ = left
        self.right_ = right
        self.value_ = value
        self.offsets_ = offsets
        return self

    def _check_predict_input(self, X) -> np.ndarray:
        check_is_fitted(self, "feat_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected "
                             f"{self.n_features_in_}")
        return np.ascontiguousarray(X)

    def predict(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        out = np.empty(X.shape[0])
        _kernels.forest_predict(X, self.feat_, self.thr_, self.left_,
                                self.right_, self.value_, self.offsets_, out)
        return out

    def predict_per_tree(self, X) -> np.ndarray:
        """Per-tree leaf values, shape (n_trees, len(X)); predict() is their mean."""
        X = self._check_predict_input(X)
        out = np.empty((self.n_trees, X.shape[0]))
        _kernels.forest_predict_per_tree(X, self.feat_, self.thr_, self.left_,
                                         self.right_, self.value_, self.offsets_, out)
        return out


@dataclass(frozen=True)
class RfConfig:
    """Forest hyperparameters as plain data, for configs and manifests."""

    n_trees: int = 100
    max_features: int | None = None
    min_leaf: int = 5
    max_depth: int | None = None

    def make_estimator(self, seed: int, stream_label: str) -> RatingForestRegressor:
        return RatingForestRegressor(
            n_trees=self.n_trees, max_features=self.max_features,
            min_leaf=self.min_leaf, max_depth=self.max_depth,
            seed=seed, stream_label=stream_label)

    def to_dict(self) -> dict:
        return {"n_trees": self.n_trees, "max_features": self.max_features,
                "min_leaf": self.min_leaf, "max_depth": self.max_depth}
