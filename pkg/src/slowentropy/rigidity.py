"""Cocycles into interval automorphisms: compositions, the metric d_A,
rigidity scans, the mixing statistic and dependence scores.

Automorphisms are exactly computable ones only: dyadic permutations, powers
of the baker map, and finite compositions of these. The unit interval is
identified with the square by bit interleaving: bit ``2i+1`` of ``t`` is
symbol ``s_i`` and bit ``2i+2`` is ``s_{-i-1}`` of a bi-infinite binary
sequence, on which the baker map acts as the left shift. Lebesgue measure
makes all bits of ``t`` independent fair coins, so every quantity below is a
finite, exact sum over assignments of the bits it depends on.
"""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, UnsupportedOperation
from .names import NameSample
from .relative import FiberBatch
from .systems.core import System
from .systems.partitions import IntervalPartition, Partition

EXACT_BITS_CAP = 22


# --------------------------------------------------------------------------- automorphisms


class IntervalAutomorphism:
    """Finite composition of primitive maps, stored in application order."""

    def __init__(self, ops: Sequence[tuple] = ()):
        self.ops = tuple(_normalize(ops))

    @property
    def is_dyadic(self) -> bool:
        return all(op[0] == "perm" for op in self.ops)

    @property
    def rank(self) -> int:
        return max((op[1] for op in self.ops if op[0] == "perm"), default=0)

    def then(self, other: "IntervalAutomorphism") -> "IntervalAutomorphism":
        """``other o self``: apply self first."""
        return IntervalAutomorphism(self.ops + other.ops)

    def __matmul__(self, other: "IntervalAutomorphism") -> "IntervalAutomorphism":
        """``self @ other`` is the composition self o other."""
        return other.then(self)

    def inverse(self) -> "IntervalAutomorphism":
        inv = []
        for op in reversed(self.ops):
            if op[0] == "perm":
                inv.append(("perm", op[1], np.argsort(op[2])))
            else:
                inv.append(("shift", -op[1]))
        return IntervalAutomorphism(inv)

    def as_dyadic(self) -> "DyadicPermutation":
        if not self.is_dyadic:
            raise UnsupportedOperation("composition involves a non-dyadic map")
        if not self.ops:
            return DyadicPermutation(np.arange(1))
        op = self.ops[0]
        return DyadicPermutation(op[2])

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalAutomorphism):
            return NotImplemented
        if self.is_dyadic and other.is_dyadic:
            m = max(self.rank, other.rank)
            return np.array_equal(_lift(self.as_dyadic().perm, m), _lift(other.as_dyadic().perm, m))
        return len(self.ops) == len(other.ops) and all(_op_equal(a, b) for a, b in zip(self.ops, other.ops))

    def __hash__(self):
        return hash(tuple((o[0], o[1]) for o in self.ops))

    def __repr__(self):
        parts = [f"perm{op[2].tolist()}" if op[0] == "perm" else f"baker^{op[1]}" for op in self.ops]
        return "Aut(" + (" then ".join(parts) or "id") + ")"


def _op_equal(a, b) -> bool:
    if a[0] != b[0] or a[1] != b[1]:
        return False
    return a[0] == "shift" or np.array_equal(a[2], b[2])


def _lift(perm: np.ndarray, rank: int) -> np.ndarray:
    """The same map written as a permutation of the 2**rank finer cells."""
    m = int(perm.size).bit_length() - 1
    d = rank - m
    if d <= 0:
        return perm
    j = np.arange(1 << rank)
    return (perm[j >> d] << d) | (j & ((1 << d) - 1))


def _normalize(ops):
    """Drop identities, merge adjacent shifts and adjacent permutations."""
    out: list[tuple] = []
    for op in ops:
        if op[0] == "shift":
            if op[1] == 0:
                continue
            if out and out[-1][0] == "shift":
                n = out[-1][1] + op[1]
                out.pop()
                if n:
                    out.append(("shift", n))
                continue
            out.append(("shift", int(op[1])))
        elif op[0] == "perm":
            perm = np.asarray(op[2], dtype=np.int64)
            rank = int(perm.size).bit_length() - 1
            if out and out[-1][0] == "perm":
                m = max(rank, out[-1][1])
                prev = _lift(out[-1][2], m)
                perm = _lift(perm, m)[prev]
                rank = m
                out.pop()
            if np.array_equal(perm, np.arange(perm.size)):
                continue
            out.append(("perm", rank, perm))
        else:
            raise InvalidArgument(f"unknown primitive {op[0]!r}")
    return out


class DyadicPermutation(IntervalAutomorphism):
    """Permutes the 2**rank dyadic cells, translating each cell onto its image."""

    def __init__(self, perm):
        perm = np.asarray(perm, dtype=np.int64)
        n = perm.size
        if n < 1 or n & (n - 1):
            raise InvalidArgument("a dyadic permutation acts on a power-of-two number of cells")
        if not np.array_equal(np.sort(perm), np.arange(n)):
            raise InvalidArgument("cell map is not a bijection")
        self.perm = perm
        self.cell_rank = n.bit_length() - 1
        super().__init__([("perm", self.cell_rank, perm)])

    @classmethod
    def identity(cls, rank: int = 0) -> "DyadicPermutation":
        return cls(np.arange(1 << rank))

    @classmethod
    def cycle(cls, cells: Sequence[int], rank: int) -> "DyadicPermutation":
        perm = np.arange(1 << rank)
        for a, b in zip(cells, list(cells[1:]) + [cells[0]]):
            perm[a] = b
        return cls(perm)

    @classmethod
    def random(cls, rank: int, rng: np.random.Generator) -> "DyadicPermutation":
        return cls(rng.permutation(1 << rank))

    def order(self) -> int:
        seen, out = np.zeros(self.perm.size, dtype=bool), 1
        for start in range(self.perm.size):
            length, j = 0, start
            while not seen[j]:
                seen[j] = True
                j = self.perm[j]
                length += 1
            if length:
                out = math.lcm(out, length)
        return out

    def __call__(self, x):
        """Image of a point of [0, 1) given as a Fraction or float."""
        x = Fraction(x)
        cell = math.floor(x * self.perm.size)
        return x + Fraction(int(self.perm[cell]) - cell, self.perm.size)


class Baker(IntervalAutomorphism):
    """``iterates``-th power of the baker map (negative powers allowed)."""

    def __init__(self, iterates: int = 1):
        self.iterates = int(iterates)
        super().__init__([("shift", self.iterates)])


def identity() -> IntervalAutomorphism:
    return IntervalAutomorphism(())


def compose_all(maps: Sequence[IntervalAutomorphism]) -> IntervalAutomorphism:
    """``maps[-1] o ... o maps[0]``."""
    ops: list = []
    for m in maps:
        ops.extend(m.ops)
    return IntervalAutomorphism(ops)


# --------------------------------------------------------------------------- exact bit engine


def _pos_to_index(p: int) -> int:
    """Bit position of t (1-based) to index of the bi-infinite sequence."""
    return (p - 1) // 2 if p % 2 else -(p // 2)


def _index_to_pos(i: int) -> int:
    return 2 * i + 1 if i >= 0 else -2 * i


def _dependencies(ops, outputs: set[int]) -> list[set[int]]:
    """Bit positions needed before each op, given the positions read after the last one."""
    stages = [set(outputs)]
    need = set(outputs)
    for op in reversed(ops):
        if op[0] == "perm":
            if any(p <= op[1] for p in need):
                need = need | set(range(1, op[1] + 1))
        else:
            need = {_index_to_pos(_pos_to_index(p) + op[1]) for p in need}
        stages.append(set(need))
    stages.reverse()
    return stages


def _forward(ops, stages, bits: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    for op, after in zip(ops, stages[1:]):
        if op[0] == "perm":
            m = op[1]
            if any(p <= m for p in after):
                cell = np.zeros_like(next(iter(bits.values())), dtype=np.int64)
                for p in range(1, m + 1):
                    cell = (cell << 1) | bits[p]
                cell = op[2][cell]
                bits = dict(bits)
                for p in range(1, m + 1):
                    bits[p] = (cell >> (m - p)) & 1
        else:
            bits = {q: bits[_index_to_pos(_pos_to_index(q) + op[1])] for q in after}
    return bits


def _enumerate(positions: Sequence[int]) -> dict[int, np.ndarray]:
    positions = sorted(positions)
    if len(positions) > EXACT_BITS_CAP:
        raise UnsupportedOperation(f"exact evaluation needs {len(positions)} free bits")
    rows = np.arange(1 << len(positions), dtype=np.int64)
    return {p: (rows >> j) & 1 for j, p in enumerate(positions)}


def _labels(bits: dict[int, np.ndarray], k: int) -> np.ndarray:
    out = np.zeros_like(next(iter(bits.values())), dtype=np.int64)
    for p in range(1, k + 1):
        out = (out << 1) | bits[p]
    return out


def _image_labels(aut: IntervalAutomorphism, k: int, extra: Sequence[IntervalAutomorphism] = ()):
    """D_k labels of x, aut(x) and each extra map's image, over an exact bit enumeration."""
    outputs = set(range(1, k + 1))
    maps = [aut, *extra]
    stages = [_dependencies(m.ops, outputs) for m in maps]
    free = set(outputs).union(*[s[0] for s in stages])
    base = _enumerate(free)
    images = [_labels(_forward(m.ops, s, base), k) for m, s in zip(maps, stages)]
    return _labels(base, k), images


# --------------------------------------------------------------------------- distances


def _dyadic_level_distance(p: np.ndarray, q: np.ndarray, rank: int, k: int) -> float:
    shift = max(rank - k, 0)
    return float(np.mean((p >> shift) != (q >> shift)))


def partition_image_distance(phi: IntervalAutomorphism, psi: IntervalAutomorphism, k: int) -> float:
    """``m{x : D_k(phi x) != D_k(psi x)}``, the partition distance of phi^{-1} D_k and psi^{-1} D_k."""
    if k < 1:
        raise InvalidArgument("level must be >= 1")
    if phi.is_dyadic and psi.is_dyadic:
        m = max(phi.rank, psi.rank, 1)
        return _dyadic_level_distance(_lift(phi.as_dyadic().perm, m), _lift(psi.as_dyadic().perm, m), m, k)
    _, (a, b) = _image_labels(phi, k, [psi])
    return float(np.mean(a != b))


def auto_distance(phi: IntervalAutomorphism, psi: IntervalAutomorphism, K: int = 16,
                  method: str = "exact", grid_bits: int | None = None, seed=0) -> float:
    """``sum_{k <= K} 2^-k dist(phi^-1 D_k, psi^-1 D_k)``; the omitted tail is at most ``2^-K``."""
    if K < 1:
        raise InvalidArgument("truncation depth K must be >= 1")
    if method == "quadrature":
        return _quadrature_distance(phi, psi, K, grid_bits or K + 6, seed)
    if method != "exact":
        raise InvalidArgument(f"unknown method {method!r}")
    if phi.is_dyadic and psi.is_dyadic:
        m = max(phi.rank, psi.rank, 1)
        p, q = _lift(phi.as_dyadic().perm, m), _lift(psi.as_dyadic().perm, m)
        return float(sum(2.0 ** -k * _dyadic_level_distance(p, q, m, k) for k in range(1, K + 1)))
    _, (a, b) = _image_labels(phi, K, [psi])
    total = 0.0
    for k in range(1, K + 1):
        shift = K - k
        total += 2.0 ** -k * float(np.mean((a >> shift) != (b >> shift)))
    return total


def truncation_error(K: int) -> float:
    return 2.0 ** -K


def _apply_square(aut: IntervalAutomorphism, t: int, bits: int) -> int:
    """Apply aut to a point t / 2**bits of the interval, in integer arithmetic.

    Each baker step consumes one bit on one side of the sequence, so the
    caller supplies enough bits for the compositions it evaluates.
    """
    half = bits // 2
    x = y = 0
    for j in range(half):
        x = (x << 1) | ((t >> (bits - 1 - 2 * j)) & 1)
        y = (y << 1) | ((t >> (bits - 2 - 2 * j)) & 1)
    for op in aut.ops:
        if op[0] == "shift":
            for _ in range(abs(op[1])):
                if op[1] > 0:
                    top = x >> (half - 1)
                    x = (x << 1) & ((1 << half) - 1)
                    y = (y >> 1) | (top << (half - 1))
                else:
                    low = y >> (half - 1)
                    y = (y << 1) & ((1 << half) - 1)
                    x = (x >> 1) | (low << (half - 1))
        else:
            t = _interleave(x, y, half)
            m = op[1]
            cell = t >> (bits - m)
            t = (int(op[2][cell]) << (bits - m)) | (t & ((1 << (bits - m)) - 1))
            x, y = _deinterleave(t, half)
    return _interleave(x, y, half)


def _interleave(x: int, y: int, half: int) -> int:
    t = 0
    for j in range(half):
        t = (t << 2) | (((x >> (half - 1 - j)) & 1) << 1) | ((y >> (half - 1 - j)) & 1)
    return t


def _deinterleave(t: int, half: int) -> tuple[int, int]:
    x = y = 0
    for j in range(half):
        x = (x << 1) | ((t >> (2 * half - 1 - 2 * j)) & 1)
        y = (y << 1) | ((t >> (2 * half - 2 - 2 * j)) & 1)
    return x, y


def _quadrature_distance(phi, psi, K: int, grid_bits: int, seed) -> float:
    """Jittered-grid estimate; an independent cross-check of the exact engine."""
    steps = sum(abs(op[1]) for m in (phi, psi) for op in m.ops if op[0] == "shift")
    bits = 2 * (max(K, grid_bits) + steps + 2)
    rng = np.random.default_rng(seed)
    cells = 1 << grid_bits
    low_bits = bits - grid_bits
    total = np.zeros(K)
    for c in range(cells):
        jitter = int(rng.integers(0, 1 << min(low_bits, 62))) << max(low_bits - 62, 0)
        t = (c << low_bits) | jitter
        a, b = _apply_square(phi, t, bits), _apply_square(psi, t, bits)
        for k in range(1, K + 1):
            total[k - 1] += (a >> (bits - k)) != (b >> (bits - k))
    return float(sum(2.0 ** -k * total[k - 1] / cells for k in range(1, K + 1)))


# --------------------------------------------------------------------------- cocycles


class Cocycle:
    """``alpha(y) = values[partition.label(y)]`` over a base system; constant without a partition."""

    def __init__(self, base: System, values: Sequence[IntervalAutomorphism], partition: Partition | None = None):
        values = list(values)
        if partition is None and len(values) != 1:
            raise InvalidArgument("a constant cocycle takes exactly one value")
        if partition is not None and len(values) != partition.size:
            raise InvalidArgument(f"cocycle needs {partition.size} values, got {len(values)}")
        self.base = base
        self.values = values
        self.partition = partition

    @classmethod
    def constant(cls, base: System, value: IntervalAutomorphism) -> "Cocycle":
        return cls(base, [value])

    @classmethod
    def random_dyadic(cls, base: System, partition: Partition, rank: int, rng) -> "Cocycle":
        rng = np.random.default_rng(rng)
        return cls(base, [DyadicPermutation.random(rank, rng) for _ in range(partition.size)], partition)

    @property
    def is_dyadic(self) -> bool:
        return all(v.is_dyadic for v in self.values)

    @property
    def rank(self) -> int:
        return max(v.rank for v in self.values)

    def labels(self, y_state, times) -> np.ndarray:
        if self.partition is None:
            return np.zeros((len(y_state), len(times)), dtype=np.int64)
        return self.base.orbit_labels(y_state, self.partition, np.asarray(times))

    def label_blocks(self, y_state, n: int, block: int = 4096):
        """Yield label blocks for times ``0..n-1`` without materializing them all."""
        start, cur = 0, y_state
        while start < n:
            stop = min(n, start + block)
            yield start, self.labels(cur, np.arange(stop - start))
            cur = self.base.advance(cur, stop - start)
            start = stop


def compose(alpha: Cocycle, y, n: int) -> IntervalAutomorphism:
    """``alpha_n(y) = alpha(S^{n-1} y) o ... o alpha(y)``; identity for n = 0."""
    if n < 0:
        raise InvalidArgument("n must be nonnegative")
    if n == 0:
        return identity()
    labels = alpha.labels(alpha.base.to_state([y]), np.arange(n))[0]
    return compose_all([alpha.values[j] for j in labels])


def _dyadic_tables(alpha: Cocycle) -> np.ndarray:
    m = max(alpha.rank, 1)
    return np.stack([_lift(v.as_dyadic().perm if v.ops else np.arange(1), m) for v in alpha.values])


def rigidity_scan(alpha: Cocycle, y, N: int, delta: float, k: int, return_distances: bool = False):
    """All ``1 <= n <= N`` with ``dist(D_k, alpha_n(y)^{-1} D_k) < delta``."""
    _check_scan(N, delta, k)
    state = alpha.base.to_state([y])
    if alpha.is_dyadic:
        times, dists = dyadic_rigidity_scan([alpha], state, N, delta, k, first_only=False, return_distances=True)
        return (times[0][0], dists[0][0]) if return_distances else times[0][0]
    times, dists, cur = [], [], identity()
    labels = alpha.labels(state, np.arange(N))[0]
    for n in range(1, N + 1):
        cur = cur.then(alpha.values[labels[n - 1]])
        d = partition_image_distance(cur, identity(), k)
        if d < delta:
            times.append(n)
            dists.append(d)
    return (times, dists) if return_distances else times


def _check_scan(N, delta, k):
    if N < 1 or not 0 < delta < 1 or k < 1:
        raise InvalidArgument("need N >= 1, 0 < delta < 1 and k >= 1")


def dyadic_rigidity_scan(cocycles: Sequence[Cocycle], y_state, N: int, delta: float, k: int,
                         first_only: bool = True, block: int = 4096, return_distances: bool = False):
    """Vectorized scan over every (cocycle, base point) pair.

    Returns ``out[c][i]``, the rigidity times of cocycle c at point i; with
    ``first_only`` each list holds at most the first time found. With
    ``return_distances`` a parallel structure of the distances is returned too.
    """
    _check_scan(N, delta, k)
    if not all(a.is_dyadic for a in cocycles):
        raise UnsupportedOperation("vectorized scan needs dyadic cocycles")
    bases = {id(a.base) for a in cocycles}
    if len(bases) != 1:
        raise InvalidArgument("cocycles of a batch scan must share their base system")
    rank = max(max(a.rank for a in cocycles), 1)
    # one global table: row offset[c] + label of cocycle c
    tables = [_lift_table(_dyadic_tables(a), rank) for a in cocycles]
    offsets = np.cumsum([0] + [t.shape[0] for t in tables])[:-1]
    table = np.concatenate(tables)
    groups: dict[int, list[int]] = {}
    for c, a in enumerate(cocycles):
        groups.setdefault(id(a.partition), []).append(c)
    refined, maps = _common_refinement(cocycles, groups)
    n_pts, n_coc = len(y_state), len(cocycles)
    shift = max(rank - k, 0)
    ident = np.arange(1 << rank)
    coarse_id = ident >> shift
    out = [[[] for _ in range(n_pts)] for _ in cocycles]
    dists = [[[] for _ in range(n_pts)] for _ in cocycles]
    # row = c * n_pts + i
    row_coc = np.repeat(np.arange(n_coc), n_pts)
    row_pt = np.tile(np.arange(n_pts), n_coc)
    cur = np.tile(ident, (n_coc * n_pts, 1))
    live = np.arange(n_coc * n_pts)
    base = cocycles[0].base
    state, start = y_state, 0
    while start < N and live.size:
        stop = min(N, start + block)
        labels = np.empty((n_coc * n_pts, stop - start), dtype=np.int64)
        refined_lab = None if refined is None else base.orbit_labels(state, refined, np.arange(stop - start))
        for key, members in groups.items():
            if refined is None:
                lab = cocycles[members[0]].labels(state, np.arange(stop - start))
            else:
                lab = maps[key][refined_lab]
            for c in members:
                labels[c * n_pts:(c + 1) * n_pts] = lab + offsets[c]
        labels = labels[live]
        for j in range(stop - start):
            # alpha_{n+1} = alpha(S^n y) o alpha_n
            cur = np.take_along_axis(table[labels[:, j]], cur, axis=1)
            dist = np.count_nonzero((cur >> shift) != coarse_id, axis=1) / ident.size
            hit = np.flatnonzero(dist < delta)
            if hit.size:
                for h, d in zip(live[hit], dist[hit]):
                    out[row_coc[h]][row_pt[h]].append(start + j + 1)
                    dists[row_coc[h]][row_pt[h]].append(float(d))
                if first_only:
                    keep = np.ones(live.size, dtype=bool)
                    keep[hit] = False
                    live, cur, labels = live[keep], cur[keep], labels[keep]
                    if not live.size:
                        break
        state = base.advance(state, stop - start)
        start = stop
    return (out, dists) if return_distances else out


def _common_refinement(cocycles, groups):
    # interval partitions share one orbit labelling on the union of their cuts
    parts = {key: cocycles[m[0]].partition for key, m in groups.items()}
    if len(parts) < 2 or not all(p is None or isinstance(p, IntervalPartition) for p in parts.values()):
        return None, None
    cuts = sorted({c for p in parts.values() if p is not None for c in p.cut_values})
    refined = IntervalPartition(cuts)
    maps = {}
    for key, p in parts.items():
        if p is None:
            maps[key] = np.zeros(len(cuts), dtype=np.int64)
        else:
            maps[key] = np.array([(bisect_right(p.cut_values, u) - 1) % p.size for u in refined.cut_values])
    return refined, maps


def _lift_table(table: np.ndarray, rank: int) -> np.ndarray:
    return np.stack([_lift(p, rank) for p in table])


def rigidity_report_csv(scans: Sequence[Sequence[int]], distances: Sequence[Sequence[float]] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["point_index", "time", "distance"])
    for i, times in enumerate(scans):
        for j, t in enumerate(times):
            d = distances[i][j] if distances is not None else 0.0
            writer.writerow([i, t, format(d, ".9g")])
    return buf.getvalue()


# --------------------------------------------------------------------------- mixing


@dataclass(frozen=True)
class DyadicSet:
    """Finite union of cells of D_depth."""

    depth: int
    cells: frozenset

    def __post_init__(self):
        if self.depth < 0 or any(not 0 <= c < (1 << self.depth) for c in self.cells):
            raise InvalidArgument("cells must index D_depth")

    @classmethod
    def interval(cls, a, b, depth: int) -> "DyadicSet":
        """``[a, b)`` with dyadic endpoints at the given depth."""
        lo, hi = Fraction(a) * (1 << depth), Fraction(b) * (1 << depth)
        if lo.denominator != 1 or hi.denominator != 1:
            raise InvalidArgument("endpoints must be multiples of 2^-depth")
        return cls(depth, frozenset(range(int(lo), int(hi))))

    @property
    def measure(self) -> float:
        return len(self.cells) / (1 << self.depth)

    def mask(self) -> np.ndarray:
        m = np.zeros(1 << self.depth, dtype=bool)
        m[list(self.cells)] = True
        return m


def mixing_statistic(alpha: Cocycle, y, E: DyadicSet, n: int) -> float:
    """``|m(E & alpha_n(y)^{-1} E) - m(E)^2|``."""
    if E.measure <= 0:
        raise InvalidArgument("E must have positive measure")
    return self_correlation_gap(compose(alpha, y, n), E)


def self_correlation_gap(phi: IntervalAutomorphism, E: DyadicSet) -> float:
    d = max(E.depth, 1)
    mask = DyadicSet(d, frozenset(c << (d - E.depth) | j for c in E.cells
                                  for j in range(1 << (d - E.depth)))).mask()
    if phi.is_dyadic:
        m = max(phi.rank, d)
        perm = _lift(phi.as_dyadic().perm, m)
        cells = np.arange(1 << m)
        inside = mask[cells >> (m - d)] & mask[perm >> (m - d)]
        both = float(inside.mean())
    else:
        x, (img,) = _image_labels(phi, d)
        both = float(np.mean(mask[x] & mask[img]))
    return abs(both - E.measure ** 2)


# --------------------------------------------------------------------------- dependence


def _event_mask(words: np.ndarray, event, position: int) -> np.ndarray:
    if event is None:
        return np.ones(words.shape[0], dtype=bool)
    if callable(event):
        return np.asarray(event(words), dtype=bool)
    return np.isin(words[:, position], list(event))


def dependence_score(fiber: NameSample | FiberBatch, A=None, B=None, mode: str = "per_fiber",
                     position: int = 0):
    """``|mu_y(A & B) - mu_y(A) mu_y(B)|`` per fiber, or its base-weighted average.

    Events are sets of partition labels read at ``position`` of the name (a
    union of partition cells), ``None`` for the whole space, or a callable on
    the word matrix returning a boolean mask.
    """
    if mode not in ("per_fiber", "averaged"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    fibers = fiber.fibers if isinstance(fiber, FiberBatch) else [fiber]
    scores = []
    for s in fibers:
        a, b = _event_mask(s.words, A, position), _event_mask(s.words, B, position)
        w = s.weights
        scores.append(abs(float(w[a & b].sum()) - float(w[a].sum()) * float(w[b].sum())))
    if mode == "averaged":
        weights = fiber.base_weights if isinstance(fiber, FiberBatch) else np.ones(1)
        return float(np.dot(weights, scores))
    return scores[0] if not isinstance(fiber, FiberBatch) else scores


# --------------------------------------------------------------------------- config


def automorphism_from_config(spec: dict) -> IntervalAutomorphism:
    """``{"kind": "identity" | "dyadic" (perm) | "cycle" (cells, rank) | "baker" (iterates) | "composition" (maps)}``."""
    kind = spec.get("kind")
    if kind == "identity":
        return identity()
    if kind == "dyadic":
        return DyadicPermutation(spec["perm"])
    if kind == "cycle":
        return DyadicPermutation.cycle(spec["cells"], spec["rank"])
    if kind == "baker":
        return Baker(spec.get("iterates", 1))
    if kind == "composition":
        return compose_all([automorphism_from_config(m) for m in spec["maps"]])
    raise InvalidArgument(f"unknown automorphism kind {kind!r}")


def cocycle_from_config(base: System, spec: dict, rng=None) -> Cocycle:
    """Constant (``value``), piecewise (``partition`` + ``values``) or ``random_dyadic`` cocycle."""
    from .systems.build import build_partition

    if "value" in spec:
        return Cocycle.constant(base, automorphism_from_config(spec["value"]))
    partition = build_partition(base, spec["partition"])
    if spec.get("random_dyadic"):
        return Cocycle.random_dyadic(base, partition, spec.get("rank", 3), rng)
    return Cocycle(base, [automorphism_from_config(v) for v in spec["values"]], partition)
