from fractions import Fraction

import numpy as np
import pytest

from slowentropy.errors import InvalidArgument
from slowentropy.folner import make_interval
from slowentropy.names import NameSample
from slowentropy.relative import collect_fibers
from slowentropy.rigidity import (
    Baker, Cocycle, DyadicPermutation, DyadicSet, auto_distance, automorphism_from_config, compose,
    dependence_score, dyadic_rigidity_scan, identity, mixing_statistic, partition_image_distance,
    rigidity_report_csv, rigidity_scan, self_correlation_gap, truncation_error,
)
from slowentropy.systems import (
    Bernoulli, CylinderPartition, IntervalPartition, Product, ProductProjection, Rotation, SecondPartition,
)
from slowentropy.systems.points import CircleCoord

R = Rotation()
Y0 = CircleCoord(int(0.3 * 2 ** 128))
SIGMA = DyadicPermutation.cycle([0, 1, 2], 2)


def random_perm(rng, rank):
    return DyadicPermutation.random(rank, rng)


def test_compose_examples():
    alpha = Cocycle.constant(R, SIGMA)
    assert compose(alpha, Y0, 0) == identity()
    assert compose(alpha, Y0, 3) == identity()
    assert compose(alpha, Y0, 1) == SIGMA
    with pytest.raises(InvalidArgument):
        compose(alpha, Y0, -1)


def test_compose_piecewise_matches_manual_product():
    rng = np.random.default_rng(1)
    P = IntervalPartition.equal(3)
    alpha = Cocycle.random_dyadic(R, P, 3, rng)
    labels = alpha.labels(R.to_state([Y0]), np.arange(6))[0]
    perm = np.arange(8)
    for lab in labels:
        perm = alpha.values[lab].perm[perm]
    assert compose(alpha, Y0, 6) == DyadicPermutation(perm)


def test_cocycle_identity():
    rng = np.random.default_rng(2)
    alpha = Cocycle.random_dyadic(R, IntervalPartition.equal(4), 3, rng)
    for a, b in [(0, 5), (3, 4), (7, 11)]:
        ya = R.step(Y0, a)
        assert compose(alpha, Y0, a + b) == compose(alpha, Y0, a).then(compose(alpha, ya, b))


def test_auto_distance_examples():
    swap = DyadicPermutation([1, 0])
    assert auto_distance(swap, swap, 8) == 0.0
    assert auto_distance(identity(), swap, 8) == pytest.approx(1 - 2 ** -8)
    assert truncation_error(8) == 2 ** -8
    with pytest.raises(InvalidArgument):
        auto_distance(swap, swap, 0)


def test_auto_distance_symmetric_and_triangle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, c = (random_perm(rng, int(rng.integers(1, 5))) for _ in range(3))
        assert auto_distance(a, b, 10) == pytest.approx(auto_distance(b, a, 10))
        assert auto_distance(a, c, 10) <= auto_distance(a, b, 10) + auto_distance(b, c, 10) + 1e-12


def test_exact_engine_matches_quadrature():
    rng = np.random.default_rng(4)
    maps = [Baker(1), Baker(3), Baker(-2), SIGMA @ Baker(1), Baker(2) @ random_perm(rng, 3),
            random_perm(rng, 2) @ Baker(1) @ random_perm(rng, 1)]
    for phi in maps:
        for psi in (identity(), Baker(1), random_perm(rng, 2)):
            exact = auto_distance(phi, psi, 6)
            quad = auto_distance(phi, psi, 6, method="quadrature", grid_bits=12)
            assert exact == pytest.approx(quad, abs=2e-3)


def test_dyadic_point_action_matches_cells():
    perm = DyadicPermutation([2, 0, 3, 1])
    assert perm(Fraction(1, 8)) == Fraction(5, 8)
    assert perm(Fraction(7, 8)) == Fraction(3, 8)


def test_baker_inverse_and_measure_preservation():
    assert Baker(3).then(Baker(-3)) == identity()
    phi = SIGMA @ Baker(2)
    assert phi.then(phi.inverse()) == identity()
    # measure preservation: images of D_k cells are equidistributed over D_k
    from slowentropy.rigidity import _image_labels
    for k in (1, 3, 5):
        _, (img,) = _image_labels(Baker(1) @ SIGMA, k)
        assert np.all(np.bincount(img, minlength=2 ** k) == img.size // 2 ** k)


def test_rigidity_scan_examples():
    assert rigidity_scan(Cocycle.constant(R, identity()), Y0, 20, 0.01, 3) == list(range(1, 21))
    six = DyadicPermutation.cycle([0, 1, 2, 3, 4, 5], 3)
    assert six.order() == 6
    assert rigidity_scan(Cocycle.constant(R, six), Y0, 60, 1e-9, 3) == list(range(6, 61, 6))
    assert rigidity_scan(Cocycle.constant(R, Baker(1)), Y0, 64, 0.1, 3) == []
    with pytest.raises(InvalidArgument):
        rigidity_scan(Cocycle.constant(R, six), Y0, 10, 1.5, 3)


def test_batch_scan_matches_compose():
    rng = np.random.default_rng(5)
    alpha = Cocycle.random_dyadic(R, IntervalPartition.equal(2), 2, rng)
    expected = [n for n in range(1, 300) if partition_image_distance(compose(alpha, Y0, n), identity(), 2) < 0.3]
    assert rigidity_scan(alpha, Y0, 299, 0.3, 2) == expected


def test_batch_scan_over_mixed_partitions():
    rng = np.random.default_rng(11)
    parts = [IntervalPartition.equal(2), IntervalPartition([0, Fraction(1, 3), Fraction(5, 7)]), None]
    cocycles = [Cocycle.random_dyadic(R, p, 2, rng) if p else Cocycle.constant(R, Baker(1)) for p in parts[:2]]
    cocycles.append(Cocycle.constant(R, DyadicPermutation.cycle([0, 1], 1)))
    pts = R.sample_state(6, 2)
    joint = dyadic_rigidity_scan(cocycles, pts, 400, 0.3, 2, first_only=False)
    assert joint == [dyadic_rigidity_scan([a], pts, 400, 0.3, 2, first_only=False)[0] for a in cocycles]


def test_rigidity_on_sampled_points():
    rng = np.random.default_rng(6)
    cocycles = [Cocycle.random_dyadic(R, IntervalPartition.equal(2), 2, rng) for _ in range(3)]
    points = R.sample_state(200, 7)
    out = dyadic_rigidity_scan(cocycles, points, 20 * 24, 1e-9, 2)
    hits = [bool(t) for per in out for t in per]
    assert np.mean(hits) >= 0.95


def test_mixing_examples():
    E = DyadicSet.interval(0, Fraction(1, 4), 2)
    alpha = Cocycle.constant(R, Baker(1))
    assert mixing_statistic(alpha, Y0, E, 0) == pytest.approx(E.measure - E.measure ** 2)
    full = DyadicSet(0, frozenset([0]))
    for n in (0, 1, 5):
        assert mixing_statistic(alpha, Y0, full, n) == pytest.approx(0.0)
    assert mixing_statistic(alpha, Y0, DyadicSet.interval(0, Fraction(1, 2), 1), 20) < 0.05
    with pytest.raises(InvalidArgument):
        mixing_statistic(alpha, Y0, DyadicSet(2, frozenset()), 3)


def test_mixing_dyadic_matches_point_evaluation():
    rng = np.random.default_rng(8)
    phi = random_perm(rng, 3)
    E = DyadicSet(2, frozenset([0, 3]))
    grid = [Fraction(2 * i + 1, 2 ** 7) for i in range(2 ** 6)]
    inside = [x for x in grid if int(x * 4) in E.cells and int(phi(x) * 4) in E.cells]
    assert self_correlation_gap(phi, E) == pytest.approx(abs(len(inside) / len(grid) - E.measure ** 2))


def test_rigid_mixing_disjoint_for_baker():
    alpha = Cocycle.constant(R, Baker(1))
    rigid = set(rigidity_scan(alpha, Y0, 64, 0.01, 3))
    sets = [DyadicSet(3, frozenset([c])) for c in range(8)]
    for n in range(1, 65):
        mixing = all(mixing_statistic(alpha, Y0, E, n) < 0.01 for E in sets)
        assert not (mixing and n in rigid)


def test_dependence_examples():
    s = NameSample.from_words(["00", "01", "10", "11"])
    assert dependence_score(s) == 0.0
    assert dependence_score(s, {1}, {1}) == pytest.approx(0.25)
    X = Product(Bernoulli([0.5, 0.5]), Bernoulli([0.3, 0.7]))
    f = ProductProjection(X, 0)
    batch = collect_fibers(f, SecondPartition(CylinderPartition(2)), make_interval(2), base_budget=4)
    A = lambda w: w[:, 0] == 1
    B = lambda w: w[:, 1] == 0
    assert dependence_score(batch, A, B, "averaged") == pytest.approx(0.0, abs=1e-15)
    assert len(dependence_score(batch, A, B)) == 4


def test_config_builders_and_csv():
    phi = automorphism_from_config({"kind": "composition", "maps": [{"kind": "baker", "iterates": 2},
                                                                     {"kind": "cycle", "cells": [0, 1], "rank": 1}]})
    assert phi == Baker(2).then(DyadicPermutation([1, 0]))
    body = rigidity_report_csv([[3, 6], []], [[0.0, 0.0], []])
    assert body == "point_index,time,distance\n0,3,0\n0,6,0\n"
    with pytest.raises(InvalidArgument):
        DyadicPermutation([0, 0])
