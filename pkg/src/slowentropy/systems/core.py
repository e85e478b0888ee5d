"""Measure-preserving systems with exact, vectorized orbit evaluation.

Every system works on state batches (see ``points``). ``step`` and ``sample``
are thin point-level wrappers around ``advance`` and ``sample_state``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import InvalidArgument, UnsupportedOperation
from .fixedpoint import MASK, MASK64, ONE, CircleArray, from_fraction, quadratic_irrational
from .partitions import CylinderPartition, Partition
from .points import (
    UNPINNED, CircleCoord, CircleState, CyclicState, GroupElem, Pair, PairState,
    ShiftState, SymbolStream,
)

EXACT_ROWS_CAP = 1 << 21


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _random_circle(n: int, rng: np.random.Generator) -> CircleState:
    hi = rng.integers(0, 1 << 64, size=n, dtype=np.uint64)
    lo = rng.integers(0, 1 << 64, size=n, dtype=np.uint64)
    return CircleState(hi, lo)


class System:
    """Base class. Subclasses implement the batch methods."""

    kind = "abstract"
    ergodic = False
    weak_mixing = False

    def sample_state(self, n: int, seed):
        raise NotImplementedError

    def advance(self, state, k: int):
        raise NotImplementedError

    def to_state(self, points):
        raise NotImplementedError

    def from_state(self, state) -> list:
        raise NotImplementedError

    def exact_support(self, partitions: Sequence[Partition], times: Sequence[int]):
        """``(state, weights)``: finitely many atoms on which every partition's
        labels at every time are constant, with their exact masses."""
        raise UnsupportedOperation(f"{self.label} has no exact enumeration")

    # point-level wrappers

    def sample(self, seed):
        return self.from_state(self.sample_state(1, seed))[0]

    def sample_points(self, n: int, seed) -> list:
        return self.from_state(self.sample_state(n, seed))

    def step(self, x, k: int = 1):
        return self.from_state(self.advance(self.to_state([x]), int(k)))[0]

    def orbit_labels(self, state, partition: Partition, times) -> np.ndarray:
        """(N, |times|) labels of ``T^t x`` for each row ``x`` and each time ``t``."""
        times = np.asarray(times, dtype=np.int64)
        out = np.empty((len(state), times.size), dtype=np.int64)
        order = np.argsort(times, kind="stable")
        cur, at = state, 0
        for j in order:
            t = int(times[j])
            if t != at:
                cur = self.advance(cur, t - at)
                at = t
            out[:, j] = partition.labels(cur)
        return out

    @property
    def label(self) -> str:
        return self.kind

    def describe(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        return f"<{self.label}>"


class Bernoulli(System):
    """Two-sided Bernoulli shift with probability vector ``p``."""

    kind = "bernoulli"
    ergodic = True
    weak_mixing = True

    def __init__(self, p: Sequence[float]):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 1 or p.size < 1 or p.size > 255:
            raise InvalidArgument("probability vector must have between 1 and 255 entries")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidArgument(f"probability vector {p.tolist()} must be nonnegative and sum to 1")
        self.p = p
        self.r = p.size
        cum = np.cumsum([Fraction(float(v)) for v in p[:-1]]) if p.size > 1 else []
        self.thresholds = np.array([min(int(c * (1 << 64)), MASK64) for c in cum], dtype=np.uint64)

    def generating_partition(self) -> CylinderPartition:
        return CylinderPartition(self.r, 1)

    def sample_state(self, n: int, seed) -> ShiftState:
        seeds = _rng(seed).integers(0, 1 << 63, size=n, dtype=np.uint64)
        return ShiftState(seeds, np.zeros(n, dtype=np.int64), self.thresholds)

    def advance(self, state: ShiftState, k: int) -> ShiftState:
        if not isinstance(state, ShiftState):
            raise InvalidArgument("point does not belong to a shift")
        return state.shifted(k)

    def to_state(self, points) -> ShiftState:
        if not all(isinstance(x, SymbolStream) for x in points):
            raise InvalidArgument("Bernoulli points must be SymbolStream")
        width = max((len(x.prefix) for x in points), default=0)
        table = None
        if width:
            table = np.full((len(points), width), UNPINNED, dtype=np.uint8)
            for i, x in enumerate(points):
                if any(not 0 <= s < self.r for s in x.prefix):
                    raise InvalidArgument(f"prefix symbol out of range for alphabet {self.r}")
                table[i, :len(x.prefix)] = x.prefix
        return ShiftState([x.seed for x in points], [x.offset for x in points], self.thresholds, table, 0)

    def from_state(self, state: ShiftState) -> list:
        out = []
        for i in range(len(state)):
            prefix = ()
            if state.table is not None:
                if state.origin != 0:
                    raise InvalidArgument("cannot convert a state pinned away from stream position 0")
                row = state.table[i]
                pinned = np.flatnonzero(row != UNPINNED)
                prefix = tuple(int(s) for s in row[: pinned[-1] + 1]) if pinned.size else ()
            out.append(SymbolStream(int(state.seeds[i]), int(state.offsets[i]), prefix))
        return out

    def orbit_labels(self, state, partition, times) -> np.ndarray:
        if isinstance(partition, CylinderPartition):
            return partition.labels_window(state, times)
        return super().orbit_labels(state, partition, times)

    def coordinate_range(self, partitions, times) -> tuple[int, int]:
        times = np.asarray(times, dtype=np.int64)
        reach = max([p.reach for p in partitions] + [0])
        if reach == 0 or times.size == 0:
            return 0, 0
        return int(times.min()), int(times.max()) + reach

    def exact_support(self, partitions, times):
        lo, hi = self.coordinate_range(partitions, times)
        width = hi - lo
        rows = self.r ** width
        if rows > EXACT_ROWS_CAP:
            raise UnsupportedOperation(f"exact Bernoulli enumeration needs {self.r}^{width} atoms")
        digits = np.arange(rows, dtype=np.int64)[:, None] // (self.r ** np.arange(width, dtype=np.int64))[None, :]
        table = (digits % self.r).astype(np.uint8)
        weights = np.prod(self.p[table], axis=1) if width else np.ones(1)
        # coordinate lo of each point sits at stream position 0
        state = ShiftState(np.zeros(rows, dtype=np.uint64), np.full(rows, -lo, dtype=np.int64),
                           self.thresholds, table if width else None, 0, strict=bool(width))
        return state, weights

    @property
    def label(self):
        return f"bernoulli({', '.join(f'{v:g}' for v in self.p)})"

    def describe(self):
        return {"kind": self.kind, "p": self.p.tolist()}


class Rotation(System):
    """Circle rotation ``x -> x + theta`` in 128-bit fixed point."""

    kind = "rotation"
    ergodic = True

    def __init__(self, theta=None):
        if theta is None:
            theta = quadratic_irrational("golden")
        elif not isinstance(theta, int) or isinstance(theta, bool):
            theta = quadratic_irrational(theta) if isinstance(theta, (str, dict)) else from_fraction(theta)
        if not 0 <= theta <= MASK:
            raise InvalidArgument("rotation angle outside [0, 1)")
        self.theta = theta
        # a fixed-point angle is rational; flag the named irrationals as ergodic
        self.ergodic = theta != 0

    def sample_state(self, n: int, seed) -> CircleState:
        return _random_circle(n, _rng(seed))

    def advance(self, state, k: int) -> CircleState:
        if not isinstance(state, CircleArray):
            raise InvalidArgument("point does not belong to a circle system")
        return CircleState(state.hi, state.lo).add((k * self.theta) & MASK)

    def orbit_labels(self, state, partition: Partition, times) -> np.ndarray:
        # all offsets t * theta at once; addition stays exact in fixed point
        times = np.asarray(times, dtype=np.int64)
        if not isinstance(state, CircleArray):
            raise InvalidArgument("point does not belong to a circle system")
        offsets = CircleArray.from_ints([(int(t) * self.theta) & MASK for t in times.tolist()])
        n, m = len(state), times.size
        grid = CircleState(np.repeat(state.hi, m), np.repeat(state.lo, m)).add_array(
            CircleArray(np.tile(offsets.hi, n), np.tile(offsets.lo, n)))
        return partition.labels(grid).reshape(n, m)

    def to_state(self, points) -> CircleState:
        if not all(isinstance(x, CircleCoord) for x in points):
            raise InvalidArgument("rotation points must be CircleCoord")
        c = CircleArray.from_ints([x.value for x in points])
        return CircleState(c.hi, c.lo)

    def from_state(self, state) -> list:
        return [CircleCoord(v) for v in state.to_ints()]

    def breakpoints(self, partitions, times) -> list[int]:
        cuts = sorted({c for p in partitions for c in p.cuts})
        if not cuts:
            return [0]
        theta = self.theta
        return sorted({(c - int(t) * theta) & MASK for c in cuts for t in times})

    def exact_support(self, partitions, times):
        pts = self.breakpoints(partitions, times)
        if len(pts) > EXACT_ROWS_CAP:
            raise UnsupportedOperation("too many arcs for exact rotation enumeration")
        ends = pts[1:] + [pts[0] + ONE]
        weights = np.array([(b - a) / ONE for a, b in zip(pts, ends)])
        c = CircleArray.from_ints(pts)
        return CircleState(c.hi, c.lo), weights

    @property
    def label(self):
        return f"rotation({self.theta / ONE:.10f})"

    def describe(self):
        return {"kind": self.kind, "theta": self.theta / ONE, "theta_fixed_point": hex(self.theta)}


class CyclicRotation(System):
    """``x -> x + step`` on Z/order with counting measure; order 1 is the trivial system."""

    kind = "cyclic"

    def __init__(self, order: int, step: int = 1):
        if order < 1:
            raise InvalidArgument("group order must be >= 1")
        self.order = int(order)
        self.shift = int(step) % self.order
        self.ergodic = np.gcd(self.shift, self.order) == 1 or self.order == 1

    def sample_state(self, n: int, seed) -> CyclicState:
        return CyclicState(_rng(seed).integers(0, self.order, size=n), self.order)

    def advance(self, state, k: int) -> CyclicState:
        if not isinstance(state, CyclicState) or state.order != self.order:
            raise InvalidArgument("point does not belong to this cyclic system")
        return CyclicState((state.values + (k * self.shift) % self.order) % self.order, self.order)

    def to_state(self, points) -> CyclicState:
        if not all(isinstance(x, GroupElem) and x.order == self.order for x in points):
            raise InvalidArgument(f"points must be GroupElem of order {self.order}")
        return CyclicState([x.index for x in points], self.order)

    def from_state(self, state) -> list:
        return [GroupElem(int(v), self.order) for v in state.values]

    def exact_support(self, partitions, times):
        return CyclicState(np.arange(self.order), self.order), np.full(self.order, 1.0 / self.order)

    @property
    def label(self):
        return "trivial" if self.order == 1 else f"cyclic({self.order}, +{self.shift})"

    def describe(self):
        return {"kind": self.kind, "order": self.order, "step": self.shift}


def trivial_system() -> CyclicRotation:
    return CyclicRotation(1)


class Odometer(CyclicRotation):
    """Base-b odometer truncated to ``digits`` digits.

    With little-endian digits, adding one with carry is addition mod b**digits.
    """

    kind = "odometer"

    def __init__(self, base: int, digits: int = 8):
        if base < 2 or digits < 1:
            raise InvalidArgument("odometer needs base >= 2 and digits >= 1")
        if base ** digits >= 1 << 62:
            raise InvalidArgument("odometer truncation too large for int64")
        self.base = int(base)
        self.digits = int(digits)
        super().__init__(base ** digits, 1)

    def digit_vector(self, x: GroupElem) -> list[int]:
        v, out = x.index, []
        for _ in range(self.digits):
            v, d = divmod(v, self.base)
            out.append(d)
        return out

    @property
    def label(self):
        return f"odometer({self.base}^{self.digits})"

    def describe(self):
        return {"kind": self.kind, "base": self.base, "digits": self.digits}


class CyclicGroup:
    """Z/m as a fiber group."""

    kind = "cyclic"

    def __init__(self, order: int):
        if order < 1:
            raise InvalidArgument("group order must be >= 1")
        self.order = int(order)

    def coerce(self, value) -> int:
        return int(value) % self.order

    def random(self, n, rng):
        return CyclicState(rng.integers(0, self.order, size=n), self.order)

    def act(self, h: CyclicState, values: np.ndarray) -> CyclicState:
        return CyclicState((h.values + values) % self.order, self.order)

    def scale(self, value: int, k: int) -> int:
        return (value * k) % self.order

    def negate(self, values):
        return (-np.asarray(values)) % self.order

    def enumerate(self):
        return CyclicState(np.arange(self.order), self.order), np.full(self.order, 1.0 / self.order)

    def to_state(self, points):
        return CyclicRotation(self.order).to_state(points)

    def from_state(self, state):
        return CyclicRotation(self.order).from_state(state)

    def describe(self):
        return {"kind": "cyclic", "order": self.order}


class CircleGroup:
    """R/Z in 128-bit fixed point as a fiber group."""

    kind = "circle"
    order = None

    def coerce(self, value) -> int:
        if isinstance(value, int) and not isinstance(value, bool) and value >= 1:
            return value & MASK
        return from_fraction(Fraction(value) % 1)

    def random(self, n, rng):
        return _random_circle(n, rng)

    def act(self, h: CircleState, values) -> CircleState:
        return h.add_array(values)

    def scale(self, value: int, k: int) -> int:
        return (value * k) & MASK

    def enumerate(self):
        raise UnsupportedOperation("circle fibers cannot be enumerated exactly")

    def to_state(self, points):
        return Rotation(0).to_state(points)

    def from_state(self, state):
        return Rotation(0).from_state(state)

    def describe(self):
        return {"kind": "circle"}


class GroupCocycle:
    """Cocycle ``alpha(y) = values[partition.label(y)]``; constant when no partition is given."""

    def __init__(self, group, values, partition: Partition | None = None):
        values = list(values) if isinstance(values, (list, tuple, np.ndarray)) else [values]
        if partition is None and len(values) != 1:
            raise InvalidArgument("a constant cocycle takes exactly one value")
        if partition is not None and len(values) != partition.size:
            raise InvalidArgument(f"cocycle needs {partition.size} values, got {len(values)}")
        self.group = group
        self.values = [group.coerce(v) for v in values]
        self.partition = partition

    @property
    def constant(self) -> bool:
        return self.partition is None

    def evaluate(self, base_state):
        """Group elements ``alpha(y)`` for a batch of base points."""
        n = len(base_state)
        if self.group.kind == "cyclic":
            table = np.asarray(self.values, dtype=np.int64)
            return table[self.partition.labels(base_state)] if self.partition else np.full(n, table[0])
        vals = CircleArray.from_ints(self.values)
        idx = self.partition.labels(base_state) if self.partition else np.zeros(n, dtype=np.int64)
        return CircleState(vals.hi[idx], vals.lo[idx])

    def leaves(self) -> list[Partition]:
        return list(self.partition.leaves()) if self.partition else []

    def describe(self):
        return {"values": [v if self.group.kind == "cyclic" else v / ONE for v in self.values],
                "piecewise": self.partition is not None}


class SkewProduct(System):
    """``(y, h) -> (S y, h + alpha(y))`` with Haar measure on the fiber group."""

    kind = "skew"

    def __init__(self, base: System, group, cocycle: GroupCocycle):
        if (cocycle.group.kind, cocycle.group.order) != (group.kind, group.order):
            raise InvalidArgument("cocycle must take values in the fiber group")
        self.base = base
        self.group = group
        self.cocycle = cocycle
        self.warnings: list[str] = []
        if not base.ergodic:
            self.warnings.append(f"skew product over non-ergodic base {base.label}")

    def sample_state(self, n: int, seed) -> PairState:
        rng = _rng(seed)
        y = self.base.sample_state(n, int(rng.integers(0, 1 << 63)))
        return PairState(y, self.group.random(n, rng))

    def _check(self, state):
        if not isinstance(state, PairState):
            raise InvalidArgument("point does not belong to a skew product")

    def advance(self, state, k: int) -> PairState:
        self._check(state)
        y, h = state.first, state.second
        if k == 0:
            return state
        if self.cocycle.constant:
            c = self.group.scale(self.cocycle.values[0], k)
            shift = np.full(len(h), c) if self.group.kind == "cyclic" else CircleArray.from_ints([c] * len(h))
            return PairState(self.base.advance(y, k), self.group.act(h, shift))
        if k > 0:
            for _ in range(k):
                h = self.group.act(h, self.cocycle.evaluate(y))
                y = self.base.advance(y, 1)
        else:
            for _ in range(-k):
                y = self.base.advance(y, -1)
                h = self._subtract(h, self.cocycle.evaluate(y))
        return PairState(y, h)

    def _subtract(self, h, values):
        if self.group.kind == "cyclic":
            return self.group.act(h, self.group.negate(values))
        neg = CircleArray.from_ints([(-v) & MASK for v in values.to_ints()])
        return self.group.act(h, neg)

    def to_state(self, points) -> PairState:
        if not all(isinstance(x, Pair) for x in points):
            raise InvalidArgument("skew product points must be Pair")
        return PairState(self.base.to_state([x.first for x in points]),
                         self.group.to_state([x.second for x in points]))

    def from_state(self, state) -> list:
        return [Pair(a, b) for a, b in zip(self.base.from_state(state.first), self.group.from_state(state.second))]

    def base_times(self, times) -> list[int]:
        times = list(times) or [0]
        return list(range(min(0, min(times)), max(0, max(times)) + 1))

    def exact_support(self, partitions, times):
        leaves = [leaf for p in partitions for leaf in p.leaves()] + self.cocycle.leaves()
        y, wy = self.base.exact_support(leaves, self.base_times(times))
        h, wh = self.group.enumerate()
        iy = np.repeat(np.arange(len(y)), len(h))
        ih = np.tile(np.arange(len(h)), len(y))
        return PairState(y.take(iy), h.take(ih)), wy[iy] * wh[ih]

    @property
    def label(self):
        g = f"Z/{self.group.order}" if self.group.kind == "cyclic" else "T"
        return f"skew({self.base.label} x {g})"

    def describe(self):
        return {"kind": self.kind, "base": self.base.describe(), "group": self.group.describe(),
                "cocycle": self.cocycle.describe(), "warnings": self.warnings}


class Product(System):
    """Direct product ``T1 x T2`` with product measure."""

    kind = "product"

    def __init__(self, first: System, second: System):
        self.first = first
        self.second = second
        self.ergodic = first.ergodic and second.ergodic and (first.weak_mixing or second.weak_mixing)
        self.weak_mixing = first.weak_mixing and second.weak_mixing

    def sample_state(self, n: int, seed) -> PairState:
        s1, s2 = np.random.SeedSequence(seed).spawn(2)
        return PairState(self.first.sample_state(n, s1), self.second.sample_state(n, s2))

    def advance(self, state, k: int) -> PairState:
        if not isinstance(state, PairState):
            raise InvalidArgument("point does not belong to a product system")
        return PairState(self.first.advance(state.first, k), self.second.advance(state.second, k))

    def to_state(self, points) -> PairState:
        if not all(isinstance(x, Pair) for x in points):
            raise InvalidArgument("product points must be Pair")
        return PairState(self.first.to_state([x.first for x in points]),
                         self.second.to_state([x.second for x in points]))

    def from_state(self, state) -> list:
        return [Pair(a, b) for a, b in zip(self.first.from_state(state.first), self.second.from_state(state.second))]

    def exact_support(self, partitions, times):
        leaves = [leaf for p in partitions for leaf in p.leaves()]
        a, wa = self.first.exact_support(leaves, times)
        b, wb = self.second.exact_support(leaves, times)
        if len(a) * len(b) > EXACT_ROWS_CAP:
            raise UnsupportedOperation("product enumeration too large")
        ia = np.repeat(np.arange(len(a)), len(b))
        ib = np.tile(np.arange(len(b)), len(a))
        return PairState(a.take(ia), b.take(ib)), wa[ia] * wb[ib]

    @property
    def label(self):
        return f"{self.first.label} x {self.second.label}"

    def describe(self):
        return {"kind": self.kind, "first": self.first.describe(), "second": self.second.describe()}

