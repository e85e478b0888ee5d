import numpy as np
import pytest
from sklearn.base import clone

from slowentropy.covering import cover_estimate
from slowentropy.errors import InvalidArgument
from slowentropy.estimators import HammingCover, RelativeHammingCover
from slowentropy.names import NameSample

from oracles import clique_cover_milp

X4 = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])


def test_fit_examples_and_params():
    est = HammingCover(epsilon=0.5).fit(X4)
    assert est.exact_ == est.lower_ == est.upper_ == 1
    assert HammingCover(epsilon=0.01).fit(X4).exact_ == 4
    assert est.get_params() == {"epsilon": 0.5, "mode": "auto", "r": None}
    assert clone(est).get_params() == est.get_params()


def test_fit_matches_oracle_with_weights():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X = rng.integers(0, 3, size=(int(rng.integers(2, 18)), 7))
        w = rng.random(len(X)) + 0.05
        est = HammingCover(epsilon=0.3, mode="exact").fit(X, sample_weight=w)
        assert est.exact_ == clique_cover_milp(X, w, 0.3)


def test_predict_and_score():
    rng = np.random.default_rng(1)
    X = rng.integers(0, 2, size=(200, 10))
    est = HammingCover(epsilon=0.3, mode="greedy").fit(X)
    labels = est.predict(X)
    assert labels.shape == (200,)
    assert set(labels.tolist()) <= set(range(-1, len(est.centers_)))
    assert est.score(X) >= 1 - 0.3 - 1e-12
    with pytest.raises(InvalidArgument):
        est.predict(X[:, :5])


def test_input_validation():
    with pytest.raises(InvalidArgument):
        HammingCover().fit([[0, -1]])
    with pytest.raises(InvalidArgument):
        HammingCover(r=2).fit([[0, 2]])
    with pytest.raises(InvalidArgument):
        HammingCover().fit(X4, sample_weight=[1, 1])
    with pytest.raises(ValueError):
        HammingCover().fit(np.zeros((0, 3)))


def test_relative_estimator_quantile():
    X = np.array([[0, 0], [0, 1], [1, 1], [1, 1], [0, 0], [1, 0], [0, 1], [1, 1]])
    groups = [0, 0, 1, 1, 2, 2, 2, 2]
    est = RelativeHammingCover(epsilon=0.1, mode="exact").fit(X, groups)
    per = [cover_estimate(NameSample(X[np.array(groups) == g], np.ones(np.sum(np.array(groups) == g)), 2),
                          0.1, "exact").exact for g in range(3)]
    assert est.upper_ == max(per)
    assert est.lower_ <= est.upper_
    with pytest.raises(InvalidArgument):
        RelativeHammingCover().fit(X, groups[:3])
