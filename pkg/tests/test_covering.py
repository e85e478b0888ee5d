
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slowentropy.covering import (
    ball_count_bound, ball_radius, binary_entropy, cover_estimate, hamming_ball_volume, mismatch_threshold,
)
from slowentropy.errors import InvalidArgument, UnsupportedOperation
from slowentropy.names import NameSample

from oracles import ball_count, brute_force_cover, clique_cover_milp

UNIFORM4 = NameSample.from_words(["00", "01", "10", "11"])


def random_instance(rng, max_words=24):
    length = int(rng.integers(2, 12))
    r = int(rng.integers(2, 4))
    n = int(rng.integers(1, max_words + 1))
    words = rng.integers(0, r, size=(n, length))
    weights = rng.dirichlet(np.full(n, float(rng.choice([0.3, 1.0, 5.0]))))
    return NameSample(words, weights, r)


def test_examples():
    assert cover_estimate(UNIFORM4, 0.01, "exact").exact == 4
    assert cover_estimate(UNIFORM4, 0.5, "exact").exact == 1
    single = NameSample.from_words(["0101"])
    for eps in (0.01, 0.3, 0.99):
        assert cover_estimate(single, eps, "exact").exact == 1


def test_oracles_agree_on_examples():
    for eps, expected in [(0.01, 4), (0.5, 1)]:
        assert brute_force_cover(UNIFORM4.words, UNIFORM4.weights, eps) == expected
        assert clique_cover_milp(UNIFORM4.words, UNIFORM4.weights, eps) == expected


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2, 1.5])
def test_epsilon_out_of_range(eps):
    with pytest.raises(InvalidArgument):
        cover_estimate(UNIFORM4, eps)


def test_exact_cap():
    rng = np.random.default_rng(0)
    big = NameSample(rng.integers(0, 2, size=(200, 12)), np.full(200, 1 / 200), 2)
    if len(big.dedup()) > 24:
        with pytest.raises(UnsupportedOperation):
            cover_estimate(big, 0.2, "exact")


def test_bracket_soundness_against_milp():
    rng = np.random.default_rng(2024)
    for _ in range(60):
        s = random_instance(rng)
        eps = float(rng.choice([0.05, 0.1, 0.2, 0.3, 0.45]))
        br = cover_estimate(s, eps, "bracket")
        gr = cover_estimate(s, eps, "greedy")
        oracle = clique_cover_milp(s.words, s.weights, eps)
        assert br.lower <= oracle <= br.upper
        assert cover_estimate(s, eps, "exact").exact == oracle
        assert br.lower <= gr.upper


def test_exact_matches_brute_force_on_tiny():
    rng = np.random.default_rng(5)
    for _ in range(40):
        s = random_instance(rng, max_words=6)
        eps = float(rng.choice([0.1, 0.25, 0.4]))
        assert cover_estimate(s, eps, "exact").exact == brute_force_cover(s.words, s.weights, eps)


def test_greedy_centers_cover_enough_mass():
    rng = np.random.default_rng(9)
    for _ in range(30):
        s = random_instance(rng, max_words=60).dedup()
        eps = 0.25
        est = cover_estimate(s, eps, "greedy")
        rad = ball_radius(eps, s.length)
        d = (s.words[:, None, :] != est.centers[None, :, :]).sum(axis=2)
        assert s.weights[(d <= rad).any(axis=1)].sum() >= 1 - eps - 1e-12
        assert len(est.centers) == est.upper


def test_monotone_in_epsilon():
    rng = np.random.default_rng(11)
    grid = [0.05, 0.1, 0.2, 0.3, 0.45]
    for _ in range(30):
        s = random_instance(rng, max_words=16)
        exact = [cover_estimate(s, e, "exact").exact for e in grid]
        assert all(a >= b for a, b in zip(exact, exact[1:]))
        for i, e1 in enumerate(grid):
            for e2 in grid[i:]:
                assert cover_estimate(s, e1, "bracket").upper >= cover_estimate(s, e2, "bracket").lower


def test_refinement_monotone():
    rng = np.random.default_rng(13)
    for _ in range(30):
        fine = rng.integers(0, 4, size=(int(rng.integers(2, 20)), 6))
        coarse = fine // 2
        w = rng.dirichlet(np.ones(len(fine)))
        for eps in (0.1, 0.2, 0.4):
            a = cover_estimate(NameSample(fine, w, 4), eps, "exact").exact
            b = cover_estimate(NameSample(coarse, w, 2), eps, "exact").exact
            assert a >= b


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bracket_ordering_property(seed):
    s = random_instance(np.random.default_rng(seed), max_words=80)
    for eps in (0.1, 0.3):
        est = cover_estimate(s, eps, "bracket")
        assert 1 <= est.lower <= est.upper


def test_ball_bound_examples():
    assert ball_count_bound(10, 2, 1e-12) == pytest.approx(1.0, abs=1e-9)
    assert binary_entropy(0.0) == 0.0
    assert ball_count(4, 2, 0.25) == 5
    assert ball_count_bound(4, 2, 0.25) >= 5
    assert ball_count(8, 3, 0.25) <= ball_count_bound(8, 3, 0.25)
    with pytest.raises(InvalidArgument):
        ball_count_bound(4, 1, 0.25)


def test_ball_volume_matches_enumeration():
    for n in range(1, 9):
        for r in (2, 3):
            for eps in (0.1, 0.25, 0.5):
                assert hamming_ball_volume(n, r, eps) == ball_count(n, r, eps)


def test_packing_covering_volume_inequality():
    for n in range(1, 5):
        words = np.array([[int(b) for b in np.binary_repr(i, n)] for i in range(2 ** n)])
        s = NameSample(words, np.full(2 ** n, 2.0 ** -n), 2)
        for eps in (0.1, 0.25, 0.4):
            exact = cover_estimate(s, eps, "exact").exact
            assert exact >= (1 - 2 * eps) * 2 ** n / ball_count_bound(n, 2, eps)
    for n in range(5, 13):
        words = np.array([[int(b) for b in np.binary_repr(i, n)] for i in range(2 ** n)])
        s = NameSample(words, np.full(2 ** n, 2.0 ** -n), 2)
        for eps in (0.1, 0.25, 0.4):
            # every cover set fits in a ball of the diameter radius
            assert cover_estimate(s, eps, "bracket").upper >= (1 - 2 * eps) * 2 ** n / ball_count_bound(n, 2, eps)


def test_thresholds():
    assert mismatch_threshold(0.25, 8) == 2
    assert ball_radius(0.25, 8) == 1
    assert mismatch_threshold(0.3, 10) == 3
