from fractions import Fraction

import numpy as np
import pytest

from slowentropy.errors import InvalidArgument, UnsupportedOperation
from slowentropy.systems import (
    Bernoulli, ComposedFactor, CyclicGroup, CyclicRotation, CylinderPartition, FirstPartition, GroupCocycle,
    GroupElem, GroupPartition, IdentityFactor, IntervalPartition, Odometer, Pair, Product, ProductProjection,
    QuotientFactor, ResiduePartition, Rotation, SecondPartition, SkewProduct, SkewProjection, TrivialFactor,
    build, build_factor, build_partition, pullback_partition, step,
)
from slowentropy.systems.fixedpoint import MASK
from slowentropy.systems.points import CircleCoord, SymbolStream

N_MC = 100_000


def skew5():
    return build({"kind": "skew", "base": {"kind": "rotation"}, "group": {"kind": "cyclic", "order": 5},
                  "cocycle": {"value": 1}})


def test_build_examples():
    B = build({"kind": "bernoulli", "p": [0.5, 0.5]})
    assert isinstance(B, Bernoulli) and B.r == 2
    R = build({"kind": "rotation"})
    assert R.theta / 2 ** 128 == pytest.approx((5 ** 0.5 - 1) / 2, abs=1e-15)
    S = skew5()
    assert isinstance(S, SkewProduct) and S.group.order == 5


@pytest.mark.parametrize("p", [[0.5, 0.6], [-0.1, 1.1], [], [0.3, 0.3, 0.3]])
def test_invalid_probability_vector(p):
    with pytest.raises(InvalidArgument):
        Bernoulli(p)


def test_skew_over_nonergodic_base_records_warning():
    S = build({"kind": "skew", "base": {"kind": "cyclic", "order": 4, "step": 2},
               "group": {"kind": "cyclic", "order": 5}, "cocycle": {"value": 1}})
    assert S.describe()["warnings"]
    assert not skew5().describe()["warnings"]


def test_rotation_step_zero_and_one():
    R = Rotation()
    assert step(R, CircleCoord(0), 1) == CircleCoord(R.theta)
    for system in (R, Bernoulli([0.2, 0.8]), skew5(), Odometer(3, 4), Product(R, CyclicRotation(7))):
        x = system.sample(3)
        assert step(system, x, 0) == x


def test_skew_two_steps_follow_cocycle():
    G = CyclicGroup(7)
    base = Rotation()
    cocycle = GroupCocycle(G, [2, 5], IntervalPartition.equal(2))
    S = SkewProduct(base, G, cocycle)
    x = S.sample(11)
    y, h = x.first, x.second.index
    a0 = [2, 5][int(y.as_float >= 0.5)]
    y1 = base.step(y, 1)
    a1 = [2, 5][int(y1.as_float >= 0.5)]
    assert step(S, x, 2) == Pair(base.step(y, 2), GroupElem((h + a0 + a1) % 7, 7))


def test_step_composition_additive():
    for system in (Rotation(), Bernoulli([0.3, 0.7]), skew5(), Odometer(2, 5)):
        x = system.sample(5)
        for a, b in [(3, 4), (-2, 9), (10, -10)]:
            assert system.step(system.step(x, a), b) == system.step(x, a + b)


def test_rotation_fixed_point_exactness():
    R = Rotation()
    x = R.sample(1)
    v = x.value
    for _ in range(10 ** 6):
        v = (v + R.theta) & MASK
    assert R.step(x, 10 ** 6).value == v


def test_point_system_mismatch():
    with pytest.raises(InvalidArgument):
        Rotation().step(SymbolStream(1), 1)


def _mass(labels, cell):
    return np.mean(labels == cell)


CASES = [
    (Bernoulli([0.3, 0.7]), CylinderPartition(2, 2)),
    (Rotation(), IntervalPartition.equal(3)),
    (Odometer(2, 6), ResiduePartition(4)),
    (skew5(), SecondPartition(GroupPartition.singletons(5))),
    (Product(Bernoulli([0.5, 0.5]), CyclicRotation(3)), FirstPartition(CylinderPartition(2))),
]


@pytest.mark.parametrize("system,partition", CASES, ids=lambda v: getattr(v, "label", ""))
def test_measure_preservation(system, partition):
    state = system.sample_state(N_MC, 123)
    now = partition.labels(state)
    later = partition.labels(system.advance(state, 1))
    for cell in range(partition.size):
        p = _mass(now, cell)
        sigma = max(np.sqrt(p * (1 - p) / N_MC), 1 / N_MC)
        assert abs(_mass(later, cell) - p) <= 4 * sigma * np.sqrt(2)


def test_bernoulli_marginals_match_p():
    B = Bernoulli([0.9, 0.1])
    labels = CylinderPartition(2).labels(B.sample_state(N_MC, 5))
    sigma = np.sqrt(0.09 / N_MC)
    assert abs(np.mean(labels == 1) - 0.1) <= 4 * sigma


def test_pullback_examples():
    B = Bernoulli([0.5, 0.5])
    Q = CylinderPartition(2)
    state = B.sample_state(1000, 1)
    assert np.array_equal(pullback_partition(IdentityFactor(B), Q).labels(state), Q.labels(state))

    S = skew5()
    f = SkewProjection(S)
    Qy = IntervalPartition.equal(2)
    P = pullback_partition(f, Qy)
    st = S.sample_state(500, 2)
    labels = P.labels(st)
    moved = S.to_state([Pair(p.first, GroupElem((p.second.index + 1) % 5, 5)) for p in S.from_state(st)])
    assert np.array_equal(P.labels(moved), labels)
    assert P.size == Qy.size


def test_product_projection_pullback_masses():
    X = Product(Bernoulli([0.3, 0.7]), Rotation())
    f = ProductProjection(X, 0)
    Q = CylinderPartition(2)
    labels = pullback_partition(f, Q).labels(X.sample_state(N_MC, 9))
    for cell, p in enumerate([0.3, 0.7]):
        assert abs(np.mean(labels == cell) - p) <= 3 * np.sqrt(p * (1 - p) / N_MC)


def _factors():
    S = skew5()
    T = build({"kind": "skew", "base": {"kind": "bernoulli", "p": [0.5, 0.5]},
               "group": {"kind": "cyclic", "order": 3},
               "cocycle": {"partition": {"kind": "cylinder"}, "values": [0, 1]}})
    TT = SkewProduct(T, CyclicGroup(3), GroupCocycle(CyclicGroup(3), [0, 1, 2], SecondPartition(
        GroupPartition.singletons(3))))
    return [IdentityFactor(S), TrivialFactor(S), SkewProjection(S), SkewProjection(T),
            ComposedFactor(SkewProjection(TT), SkewProjection(T)),
            ProductProjection(Product(Bernoulli([0.5, 0.5]), Rotation()), 1),
            QuotientFactor(CyclicRotation(12, 5), 4)]


@pytest.mark.parametrize("factor", _factors(), ids=lambda f: f.label)
def test_factor_equivariance(factor):
    src, tgt = factor.source, factor.target
    x = src.sample_state(1000, 4)
    for k in range(64):
        lhs = tgt.from_state(factor.apply_state(src.advance(x, k)))
        rhs = tgt.from_state(tgt.advance(factor.apply_state(x), k))
        assert lhs == rhs


def test_skew_fiber_is_uniform_group():
    f = SkewProjection(build({"kind": "skew", "base": {"kind": "rotation"},
                              "group": {"kind": "cyclic", "order": 3}, "cocycle": {"value": 1}}))
    P = SecondPartition(GroupPartition.singletons(3))
    y = f.target.sample_state(1, 0)
    x, w, owner = f.fiber_states(y, [P], [0], 64, 0, True)
    assert len(x) == 3 and np.allclose(w, 1 / 3)
    assert sorted(P.labels(x).tolist()) == [0, 1, 2]


def test_exact_support_bernoulli_cylinders():
    B = Bernoulli([0.9, 0.1])
    state, w = B.exact_support([CylinderPartition(2)], [0, 1])
    words = B.orbit_labels(state, CylinderPartition(2), np.array([0, 1]))
    masses = {tuple(r): 0.0 for r in words.tolist()}
    for r, v in zip(words.tolist(), w):
        masses[tuple(r)] += v
    assert masses == pytest.approx({(0, 0): 0.81, (0, 1): 0.09, (1, 0): 0.09, (1, 1): 0.01})


def test_circle_fiber_enumeration_unsupported():
    S = build({"kind": "skew", "base": {"kind": "rotation"}, "group": {"kind": "circle"},
               "cocycle": {"value": 0.25}})
    with pytest.raises(UnsupportedOperation):
        S.exact_support([SecondPartition(IntervalPartition.equal(2))], [0, 1])


def test_build_partition_and_factor_specs():
    S = skew5()
    P = build_partition(S, {"kind": "fiber"})
    assert P.size == 5
    assert build_partition(Rotation(), {"kind": "intervals", "cuts": [0, 0.25, 0.5]}).size == 3
    assert isinstance(build_factor(S, None), TrivialFactor)
    assert isinstance(build_factor(S, {"kind": "skew_projection"}), SkewProjection)
    with pytest.raises(InvalidArgument):
        build({"kind": "nope"})


def test_interval_labels_half_open():
    P = IntervalPartition([Fraction(0), Fraction(1, 2)])
    R = Rotation()
    state = R.to_state([CircleCoord(0), CircleCoord(1 << 127), CircleCoord((1 << 127) - 1)])
    assert P.labels(state).tolist() == [0, 1, 0]


def test_rotation_orbit_labels_match_stepping():
    R = Rotation()
    P = IntervalPartition([0, Fraction(1, 3), Fraction(5, 7)])
    state = R.sample_state(9, 4)
    times = np.array([0, 7, 1, 4000, 17, 7])
    expected = np.stack([P.labels(R.advance(state, int(t))) for t in times], axis=1)
    assert np.array_equal(R.orbit_labels(state, P, times), expected)
