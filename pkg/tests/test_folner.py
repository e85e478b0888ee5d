import numpy as np
import pytest
from hypothesis import given, strategies as st

from slowentropy.errors import InvalidArgument
from slowentropy.folner import FolnerSequence, FolnerSet, defect, make_interval, make_union, sparsify_times


def test_make_interval_examples():
    assert make_interval(1).elements.tolist() == [0]
    assert make_interval(4).elements.tolist() == [0, 1, 2, 3]
    F = make_interval(10)
    assert (len(F), F.min, F.max) == (10, 0, 9)


def test_make_interval_rejects_zero():
    with pytest.raises(InvalidArgument):
        make_interval(0)


def test_make_union_examples():
    assert make_union([], 3).elements.tolist() == [0, 1, 2]
    assert make_union([10], 2).elements.tolist() == [0, 1, 10, 11]
    assert make_union([2], 4).elements.tolist() == [0, 1, 2, 3, 4, 5]


def test_make_union_rejects_unsorted_anchors():
    with pytest.raises(InvalidArgument):
        make_union([5, 5], 2)
    with pytest.raises(InvalidArgument):
        make_union([7, 3], 2)


def test_defect_examples():
    assert defect(make_interval(10), 1) == pytest.approx(0.9)
    assert defect(make_interval(10), 0) == 1.0
    assert defect(FolnerSet.from_iterable([0, 1, 10, 11]), 1) == pytest.approx(0.5)


@given(st.integers(1, 200), st.integers(-250, 250))
def test_interval_defect_closed_form(n, g):
    expected = max(0, n - abs(g)) / n
    assert defect(make_interval(n), g) == pytest.approx(expected)


@given(st.lists(st.integers(0, 60), max_size=8, unique=True), st.integers(1, 9), st.integers(-20, 20))
def test_union_matches_naive_and_defect_symmetric(anchors, width, g):
    anchors = sorted(anchors)
    naive = set(range(width))
    for a in anchors:
        naive |= set(range(a, a + width))
    F = make_union(anchors, width)
    assert F.elements.tolist() == sorted(naive)
    assert defect(F, g) == pytest.approx(defect(F, -g))


def test_sequences_sizes_nondecreasing():
    seqs = [FolnerSequence.interval(), FolnerSequence.union([5, 40], 2),
            FolnerSequence.rigidity([1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377])]
    for seq in seqs:
        top = seq.max_index or 30
        sizes = [len(seq(n)) for n in range(1, top + 1)]
        assert all(b >= a for a, b in zip(sizes, sizes[1:]))


def test_rigidity_sequence_gaps_and_config_roundtrip():
    times = sparsify_times([1, 2, 3, 5, 8, 13, 21, 34, 55])
    assert all(b - a > k for k, (a, b) in enumerate(zip(times, times[1:]), start=1))
    seq = FolnerSequence.from_config({"kind": "rigidity", "rigidity_times": [3, 10, 40], "width_rule": "log"})
    assert seq(3) == make_union(seq.params["rigidity_times"][:2], seq.width(3))
    assert FolnerSequence.from_config({"kind": "interval"})(5) == make_interval(5)


def test_cap_rejected():
    with pytest.raises(InvalidArgument):
        make_interval((1 << 22) + 1)


def test_folner_set_validation():
    with pytest.raises(InvalidArgument):
        FolnerSet(np.array([2, 1]))
    with pytest.raises(InvalidArgument):
        FolnerSet(np.array([], dtype=np.int64))
