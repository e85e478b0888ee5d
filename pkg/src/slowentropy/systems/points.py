"""Single points and their vectorized batch counterparts ("states").

Public operations take and return the small frozen point classes; the heavy
lifting (names over long windows, fibers, exact enumeration) runs on state
batches, which hold the same data column-wise in numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .fixedpoint import MASK, CircleArray

UNPINNED = 255
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class SymbolStream:
    """Point of a two-sided shift: symbol ``i`` of the point is symbol ``offset + i`` of the stream.

    Stream symbols come from a seeded counter hash; positions ``[0, len(prefix))``
    of the stream are pinned to ``prefix`` instead.
    """

    seed: int
    offset: int = 0
    prefix: tuple = ()


@dataclass(frozen=True)
class CircleCoord:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= MASK:
            raise InvalidArgument("circle coordinate outside [0, 2**128)")

    @property
    def as_float(self) -> float:
        return self.value / float(1 << 128)


@dataclass(frozen=True)
class GroupElem:
    index: int
    order: int

    def __post_init__(self):
        if self.order < 1 or not 0 <= self.index < self.order:
            raise InvalidArgument(f"group element {self.index} invalid for order {self.order}")


@dataclass(frozen=True)
class Pair:
    first: object
    second: object


@dataclass(frozen=True)
class Square:
    """Point of the unit square as two 64-bit fixed-point fractions."""

    x: int
    y: int


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def hash_uniform64(seeds: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Counter-based 64-bit hash of (seed, position); uniform on uint64 for distinct inputs."""
    with np.errstate(over="ignore"):
        s = _mix(np.asarray(seeds, dtype=np.uint64) * _GAMMA)
        p = np.asarray(positions).astype(np.int64).view(np.uint64)
        return _mix(s + p * _GAMMA)


class ShiftState:
    """Batch of shift points.

    ``table[i, j]`` pins symbol at stream position ``origin + j`` of row ``i``
    (``UNPINNED`` means fall back to the hash). With ``strict`` every read must
    hit a pinned entry; exact enumeration relies on that to detect reads outside
    the enumerated coordinates.
    """

    __slots__ = ("seeds", "offsets", "thresholds", "table", "origin", "strict")

    def __init__(self, seeds, offsets, thresholds, table=None, origin=0, strict=False):
        self.seeds = np.asarray(seeds, dtype=np.uint64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.thresholds = thresholds
        self.table = table
        self.origin = int(origin)
        self.strict = strict

    def __len__(self):
        return len(self.offsets)

    def shifted(self, k: int) -> "ShiftState":
        return ShiftState(self.seeds, self.offsets + np.int64(k), self.thresholds, self.table,
                          self.origin, self.strict)

    def symbols(self, rel: np.ndarray) -> np.ndarray:
        """Symbols at stream positions ``offsets[:, None] + rel[None, :]`` as an (N, K) array."""
        rel = np.asarray(rel, dtype=np.int64)
        pos = self.offsets[:, None] + rel[None, :]
        if self.table is None:
            seeds = np.broadcast_to(self.seeds[:, None], pos.shape)
            return np.searchsorted(self.thresholds, hash_uniform64(seeds, pos), side="right").astype(np.uint8)
        idx = pos - self.origin
        inside = (idx >= 0) & (idx < self.table.shape[1])
        rows = np.broadcast_to(np.arange(len(self))[:, None], pos.shape)
        out = np.full(pos.shape, UNPINNED, dtype=np.uint8)
        out[inside] = self.table[rows[inside], idx[inside]]
        missing = out == UNPINNED
        if missing.any():
            if self.strict:
                raise InvalidArgument("exact enumeration read a coordinate outside its support")
            seeds = np.broadcast_to(self.seeds[:, None], pos.shape)
            vals = hash_uniform64(seeds[missing], pos[missing])
            out[missing] = np.searchsorted(self.thresholds, vals, side="right")
        return out

    def take(self, idx) -> "ShiftState":
        table = None if self.table is None else self.table[idx]
        return ShiftState(self.seeds[idx], self.offsets[idx], self.thresholds, table, self.origin, self.strict)

    @staticmethod
    def concat(parts) -> "ShiftState":
        seeds = np.concatenate([p.seeds for p in parts])
        offsets = np.concatenate([p.offsets for p in parts])
        strict = any(p.strict for p in parts)
        pinned = [p for p in parts if p.table is not None]
        if not pinned:
            return ShiftState(seeds, offsets, parts[0].thresholds)
        lo = min(p.origin for p in pinned)
        hi = max(p.origin + p.table.shape[1] for p in pinned)
        table = np.full((len(offsets), hi - lo), UNPINNED, dtype=np.uint8)
        row = 0
        for p in parts:
            if p.table is not None:
                table[row:row + len(p), p.origin - lo:p.origin - lo + p.table.shape[1]] = p.table
            row += len(p)
        return ShiftState(seeds, offsets, parts[0].thresholds, table, lo, strict)


class CircleState(CircleArray):
    @staticmethod
    def concat(parts) -> "CircleState":
        c = CircleArray.concat(parts)
        return CircleState(c.hi, c.lo)

    def take(self, idx) -> "CircleState":
        return CircleState(self.hi[idx], self.lo[idx])

    def add(self, delta: int) -> "CircleState":
        c = CircleArray.add(self, delta)
        return CircleState(c.hi, c.lo)

    def add_array(self, other) -> "CircleState":
        c = CircleArray.add_array(self, other)
        return CircleState(c.hi, c.lo)


class CyclicState:
    """Batch of elements of Z/order (also used for truncated odometers)."""

    __slots__ = ("values", "order")

    def __init__(self, values, order: int):
        self.values = np.asarray(values, dtype=np.int64)
        self.order = int(order)

    def __len__(self):
        return len(self.values)

    def take(self, idx) -> "CyclicState":
        return CyclicState(self.values[idx], self.order)

    @staticmethod
    def concat(parts) -> "CyclicState":
        return CyclicState(np.concatenate([p.values for p in parts]), parts[0].order)


class PairState:
    __slots__ = ("first", "second")

    def __init__(self, first, second):
        if len(first) != len(second):
            raise InvalidArgument("pair components must have equal batch length")
        self.first = first
        self.second = second

    def __len__(self):
        return len(self.first)

    def take(self, idx) -> "PairState":
        return PairState(self.first.take(idx), self.second.take(idx))

    @staticmethod
    def concat(parts) -> "PairState":
        return PairState(concat_states([p.first for p in parts]), concat_states([p.second for p in parts]))


def concat_states(parts):
    parts = list(parts)
    if not parts:
        raise InvalidArgument("cannot concatenate an empty list of states")
    return type(parts[0]).concat(parts)


def repeat_state(state, counts):
    """Repeat row i of ``state`` ``counts[i]`` times (or every row ``counts`` times)."""
    idx = np.repeat(np.arange(len(state)), counts)
    return state.take(idx)
