"""Finite partitions, evaluated on state batches.

A partition never holds a reference to its system; it reads whatever
coordinates the state batch carries. Labels are ``int64`` arrays in
``[0, size)``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from ..errors import InvalidArgument
from .fixedpoint import ONE, from_fraction
from .points import CircleState, CyclicState, PairState, ShiftState


class Partition:
    size: int = 1

    def labels(self, state) -> np.ndarray:
        raise NotImplementedError

    def leaves(self) -> Iterator["Partition"]:
        yield self

    @property
    def reach(self) -> int:
        """Number of consecutive shift coordinates read, over all leaves."""
        return max((p.length for p in self.leaves() if isinstance(p, CylinderPartition)), default=0)

    @property
    def cuts(self) -> list[int]:
        out: set[int] = set()
        for p in self.leaves():
            if isinstance(p, IntervalPartition):
                out.update(p.cut_values)
        return sorted(out)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(size={self.size})"


def _expect(state, cls, who: str):
    if not isinstance(state, cls):
        raise InvalidArgument(f"{who} cannot read a {type(state).__name__} batch")


class ConstantPartition(Partition):
    size = 1

    def labels(self, state) -> np.ndarray:
        return np.zeros(len(state), dtype=np.int64)

    def leaves(self):
        return iter(())


class CylinderPartition(Partition):
    """Shift partition by the symbols at coordinates ``0, ..., length-1``."""

    def __init__(self, alphabet: int, length: int = 1):
        if alphabet < 1 or length < 1:
            raise InvalidArgument("cylinder partition needs alphabet >= 1 and length >= 1")
        self.alphabet = int(alphabet)
        self.length = int(length)
        self.size = self.alphabet ** self.length

    def labels(self, state) -> np.ndarray:
        _expect(state, ShiftState, "CylinderPartition")
        syms = state.symbols(np.arange(self.length)).astype(np.int64)
        weights = self.alphabet ** np.arange(self.length, dtype=np.int64)
        return syms @ weights

    def labels_window(self, state, window: np.ndarray) -> np.ndarray:
        """(N, |window|) labels in one shot; the shift's fast path."""
        window = np.asarray(window, dtype=np.int64)
        if self.length == 1:
            return state.symbols(window).astype(np.int64)
        rel = (window[:, None] + np.arange(self.length)[None, :]).ravel()
        syms = state.symbols(rel).astype(np.int64).reshape(len(state), len(window), self.length)
        return syms @ (self.alphabet ** np.arange(self.length, dtype=np.int64))


class IntervalPartition(Partition):
    """Circle partition into half-open arcs ``[c_i, c_{i+1})``, the last one wrapping through 0."""

    def __init__(self, cuts: Sequence):
        vals = sorted({c if isinstance(c, int) and not isinstance(c, bool) and c >= 1 else from_fraction(c)
                       for c in cuts})
        if not vals:
            raise InvalidArgument("interval partition needs at least one cut")
        self.cut_values = vals
        self.size = len(vals)

    @classmethod
    def dyadic(cls, depth: int) -> "IntervalPartition":
        return cls([Fraction(i, 2 ** depth) for i in range(2 ** depth)])

    @classmethod
    def equal(cls, cells: int, offset=0) -> "IntervalPartition":
        return cls([(Fraction(offset) + Fraction(i, cells)) % 1 for i in range(cells)])

    def labels(self, state) -> np.ndarray:
        _expect(state, CircleState, "IntervalPartition")
        count = np.zeros(len(state), dtype=np.int64)
        for c in self.cut_values:
            count += state.geq(c)
        return (count - 1) % self.size

    def measures(self) -> np.ndarray:
        vals = self.cut_values + [self.cut_values[0] + ONE]
        return np.array([(b - a) / ONE for a, b in zip(vals, vals[1:])])


class ResiduePartition(Partition):
    """Partition of Z/order (or a truncated odometer) by the residue mod ``modulus``."""

    def __init__(self, modulus: int):
        if modulus < 1:
            raise InvalidArgument("modulus must be >= 1")
        self.modulus = int(modulus)
        self.size = self.modulus

    def labels(self, state) -> np.ndarray:
        _expect(state, CyclicState, "ResiduePartition")
        if state.order % self.modulus:
            raise InvalidArgument(f"modulus {self.modulus} does not divide group order {state.order}")
        return state.values % self.modulus


class GroupPartition(Partition):
    """Arbitrary labeling of the elements of Z/m."""

    def __init__(self, assignment: Sequence[int]):
        arr = np.asarray(assignment, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0 or arr.min() < 0:
            raise InvalidArgument("group partition needs a nonempty nonnegative assignment")
        self.assignment = arr
        self.size = int(arr.max()) + 1

    @classmethod
    def singletons(cls, order: int) -> "GroupPartition":
        return cls(range(order))

    def labels(self, state) -> np.ndarray:
        _expect(state, CyclicState, "GroupPartition")
        if state.order != self.assignment.size:
            raise InvalidArgument(f"assignment has {self.assignment.size} entries, group order is {state.order}")
        return self.assignment[state.values]


class FirstPartition(Partition):
    """Partition of a pair space read off its first (base) coordinate."""

    def __init__(self, inner: Partition):
        self.inner = inner
        self.size = inner.size

    def labels(self, state) -> np.ndarray:
        _expect(state, PairState, type(self).__name__)
        return self.inner.labels(state.first)

    def leaves(self):
        return self.inner.leaves()


class SecondPartition(FirstPartition):
    """Partition of a pair space read off its second (fiber) coordinate."""

    def labels(self, state) -> np.ndarray:
        _expect(state, PairState, type(self).__name__)
        return self.inner.labels(state.second)


BasePartition = FirstPartition
FiberPartition = SecondPartition


class JoinPartition(Partition):
    """Common refinement; the label is the mixed-radix code of the parts' labels."""

    def __init__(self, *parts: Partition):
        if not parts:
            raise InvalidArgument("join of no partitions")
        self.parts = parts
        self.size = int(np.prod([p.size for p in parts]))

    def labels(self, state) -> np.ndarray:
        out = np.zeros(len(state), dtype=np.int64)
        for p in self.parts:
            out = out * p.size + p.labels(state)
        return out

    def leaves(self):
        for p in self.parts:
            yield from p.leaves()


class PullbackPartition(Partition):
    """``label(x) = inner.label(factor.apply(x))``."""

    def __init__(self, factor, inner: Partition):
        self.factor = factor
        self.inner = inner
        self.size = inner.size

    def labels(self, state) -> np.ndarray:
        return self.inner.labels(self.factor.apply_state(state))

    def leaves(self):
        return self.inner.leaves()


class FunctionPartition(Partition):
    """Escape hatch: labels from an arbitrary vectorized function of the state batch."""

    def __init__(self, fn: Callable, size: int, reach: int = 0, cuts: Sequence[int] = ()):
        self.fn = fn
        self.size = int(size)
        self._reach = reach
        self._cuts = list(cuts)

    def labels(self, state) -> np.ndarray:
        out = np.asarray(self.fn(state), dtype=np.int64)
        if out.size and (out.min() < 0 or out.max() >= self.size):
            raise InvalidArgument("function partition produced out-of-range labels")
        return out

    @property
    def reach(self) -> int:
        return self._reach

    @property
    def cuts(self) -> list[int]:
        return self._cuts


def pullback_partition(factor, partition: Partition) -> Partition:
    """Partition of ``factor.source`` induced by a partition of ``factor.target``."""
    return PullbackPartition(factor, partition)
