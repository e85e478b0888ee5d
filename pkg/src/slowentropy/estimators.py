"""Estimator-style wrappers around the covering routines.

Rows of ``X`` are words (integer symbols); ``sample_weight`` is the
measure on them. Fitted attributes end in an underscore.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .covering import ball_radius, cover_estimate, mismatch_counts
from .errors import InvalidArgument
from .names import NameSample, pack_words
from .relative import FiberBatch, relative_from_batch


def _check_words(X, r=None):
    X = check_array(X, dtype=np.int64, ensure_min_features=1)
    if X.min() < 0:
        raise InvalidArgument("symbols must be nonnegative")
    r = int(r) if r is not None else max(2, int(X.max()) + 1)
    if X.max() >= r:
        raise InvalidArgument(f"symbols must lie in [0, {r})")
    return X, r


def _check_weights(sample_weight, n):
    if sample_weight is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
        raise InvalidArgument("sample_weight must be nonnegative with positive sum, one per row")
    return w / w.sum()


class HammingCover(BaseEstimator):
    """Hamming epsilon-covering number of a weighted word sample.

    Parameters
    ----------
    epsilon : float in (0, 1)
    mode : {"auto", "exact", "bracket", "greedy"}
    r : alphabet size, inferred from ``X`` when None
    """

    def __init__(self, epsilon=0.1, mode="auto", r=None):
        self.epsilon = epsilon
        self.mode = mode
        self.r = r

    def fit(self, X, y=None, sample_weight=None):
        X, r = _check_words(X, self.r)
        w = _check_weights(sample_weight, X.shape[0])
        est = cover_estimate(NameSample(X, w, r), self.epsilon, self.mode)
        self.r_ = r
        self.n_features_in_ = X.shape[1]
        self.lower_, self.upper_, self.exact_ = est.lower, est.upper, est.exact
        self.estimate_ = est
        self.centers_ = np.asarray(est.centers, dtype=np.int64)
        self.radius_ = ball_radius(self.epsilon, X.shape[1])
        return self

    def predict(self, X):
        """Index of the first greedy ball containing each word, -1 if none."""
        check_is_fitted(self, "centers_")
        X, _ = _check_words(X, self.r_)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgument(f"expected words of length {self.n_features_in_}, got {X.shape[1]}")
        packed = pack_words(X, self.r_)
        out = np.full(X.shape[0], -1, dtype=np.int64)
        for j, c in enumerate(pack_words(self.centers_, self.r_)):
            hit = (out < 0) & (mismatch_counts(packed, c, self.r_) <= self.radius_)
            out[hit] = j
        return out

    def score(self, X, y=None, sample_weight=None):
        """Mass of ``X`` covered by the fitted balls."""
        w = _check_weights(sample_weight, len(X))
        return float(w[self.predict(X) >= 0].sum())


class RelativeHammingCover(BaseEstimator):
    """Relative covering number: ``groups`` assigns each word to a fiber.

    ``group_weight`` gives the base measure of each fiber (uniform when
    None); ``sample_weight`` is normalized within every fiber.
    """

    def __init__(self, epsilon=0.1, mode="bracket", r=None):
        self.epsilon = epsilon
        self.mode = mode
        self.r = r

    def fit(self, X, groups, sample_weight=None, group_weight=None):
        X, r = _check_words(X, self.r)
        groups = np.asarray(groups)
        if groups.shape != (X.shape[0],):
            raise InvalidArgument("one group label per row required")
        w = _check_weights(sample_weight, X.shape[0])
        labels, inverse = np.unique(groups, return_inverse=True)
        fibers = [NameSample(X[inverse == g], w[inverse == g], r) for g in range(labels.size)]
        base = np.ones(labels.size) if group_weight is None else np.asarray(group_weight, dtype=np.float64)
        est = relative_from_batch(FiberBatch(base, fibers), self.epsilon, self.mode)
        self.groups_ = labels
        self.n_features_in_ = X.shape[1]
        self.lower_, self.upper_ = est.value_lower, est.value_upper
        self.per_fiber_ = est.per_fiber
        self.estimate_ = est
        return self
