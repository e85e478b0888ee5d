"""Hamming epsilon-covering numbers of weighted name samples.

A family of sets covers when every set has normalized Hamming diameter at
most epsilon and their union carries mass at least ``1 - epsilon``. Three
routes are offered: a greedy upper bound from radius-epsilon/2 balls, a lower
bound from an epsilon-separated family, and an exact branch-and-bound over
maximal cliques of the "within epsilon" graph for small instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import InvalidArgument, UnsupportedOperation
from .names import NameSample, mismatch_counts

EXACT_CAP = 24
MASS_TOL = 1e-12
_SLACK = 1e-9
_MAX_BALL = 200_000


@dataclass
class CoverEstimate:
    lower: int
    upper: int
    epsilon: float
    exact: int | None = None
    method: str = "bracket"
    n_words: int = 0
    notes: list = field(default_factory=list)
    centers: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not self.lower <= self.exact <= self.upper:
            raise AssertionError("exact value outside its bracket")

    @property
    def value(self) -> int:
        return self.exact if self.exact is not None else self.upper


def mismatch_threshold(epsilon: float, length: int) -> int:
    """Largest mismatch count whose normalized distance is at most epsilon."""
    return int(math.floor(epsilon * length + _SLACK))


def ball_radius(epsilon: float, length: int) -> int:
    """Mismatch radius of an epsilon/2 ball; any two members are within epsilon."""
    return int(math.floor(epsilon * length / 2 + _SLACK))


def _check_epsilon(epsilon: float):
    if not 0 < epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon!r}")


def hamming_ball_volume(n: int, r: int, epsilon: float) -> int:
    """Number of words of length n over r symbols within normalized distance epsilon of a word."""
    k = min(n, mismatch_threshold(epsilon, n))
    return sum(math.comb(n, j) * (r - 1) ** j for j in range(k + 1))


def binary_entropy(t: float) -> float:
    if t <= 0 or t >= 1:
        return 0.0
    return -t * math.log(t) - (1 - t) * math.log(1 - t)


def ball_count_bound(window_size: int, r: int, epsilon: float) -> float:
    """``exp(n (eps log(r-1) + H(eps)))``, an upper bound on the epsilon-ball volume for eps <= 1 - 1/r."""
    if r < 2:
        raise InvalidArgument("alphabet size must be at least 2")
    if window_size < 1:
        raise InvalidArgument("window size must be positive")
    if not 0 <= epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in [0, 1), got {epsilon!r}")
    log_r1 = math.log(r - 1) if r > 2 else 0.0
    return math.exp(window_size * (epsilon * log_r1 + binary_entropy(epsilon)))


class _Instance:
    """Deduplicated words in descending-weight order with distance helpers."""

    def __init__(self, sample: NameSample):
        s = sample.dedup()
        self.r = s.r
        self.length = s.length
        # stable sort keeps lexicographic order among equal weights
        order = np.argsort(-s.weights, kind="stable")
        self.words = s.words[order]
        self.weights = s.weights[order]
        self.packed = s.packed()[order]
        self.n = len(order)
        self._keys = None
        self._key_order = None

    def distances_to(self, i: int, rows: np.ndarray) -> np.ndarray:
        return mismatch_counts(self.packed[rows], self.packed[i], self.r)

    @property
    def keyable(self) -> bool:
        return self.length * math.log2(max(self.r, 2)) <= 62

    def _ensure_keys(self):
        if self._keys is None:
            powers = self.r ** np.arange(self.length - 1, -1, -1, dtype=np.int64)
            keys = self.words.astype(np.int64) @ powers
            self._key_order = np.argsort(keys)
            self._keys = keys[self._key_order]
            self._powers = powers

    def ball_members(self, i: int, radius: int) -> np.ndarray:
        """Row indices of every word within ``radius`` mismatches of row i."""
        self._ensure_keys()
        patterns = _ball_patterns(self.length, self.r, radius)
        if self.r == 2:
            center = int(self.words[i].astype(np.int64) @ self._powers)
            cand = np.bitwise_xor(patterns, np.int64(center))
        else:
            digits = (self.words[i][None, :].astype(np.int64) + patterns) % self.r
            cand = digits @ self._powers
        pos = np.searchsorted(self._keys, cand)
        pos = np.minimum(pos, self.n - 1)
        hit = self._keys[pos] == cand
        return self._key_order[pos[hit]]

    def ball_cost(self, radius: int) -> float:
        if not self.keyable:
            return math.inf
        vol = sum(math.comb(self.length, j) * (self.r - 1) ** j for j in range(min(radius, self.length) + 1))
        if vol > _MAX_BALL:
            return math.inf
        return vol * (1 if self.r == 2 else self.length) * 4

    def scan_cost(self, alive: int) -> float:
        return alive * self.packed.shape[1]


@lru_cache(maxsize=64)
def _ball_patterns(length: int, r: int, radius: int) -> np.ndarray:
    """XOR masks (r = 2) or additive digit offsets (r > 2) spanning a Hamming ball."""
    radius = min(radius, length)
    if r == 2:
        bits = np.int64(1) << np.arange(length - 1, -1, -1, dtype=np.int64)
        out = [np.zeros(1, dtype=np.int64)]
        for k in range(1, radius + 1):
            combos = np.array(list(combinations(range(length), k)), dtype=np.int64)
            out.append(np.bitwise_or.reduce(bits[combos], axis=1))
        return np.concatenate(out)
    rows = [np.zeros((1, length), dtype=np.int64)]
    offsets = np.arange(1, r, dtype=np.int64)
    for k in range(1, radius + 1):
        combos = np.array(list(combinations(range(length), k)), dtype=np.int64)
        choice = np.stack(np.meshgrid(*([offsets] * k), indexing="ij"), axis=-1).reshape(-1, k)
        block = np.zeros((len(combos) * len(choice), length), dtype=np.int64)
        rr = np.repeat(np.arange(len(combos) * len(choice)), k)
        cc = np.repeat(combos, len(choice), axis=0).ravel()
        block[rr, cc] = np.tile(choice, (len(combos), 1)).ravel()
        rows.append(block)
    return np.concatenate(rows)


def _neighbors(inst: _Instance, i: int, radius: int, alive: np.ndarray) -> np.ndarray:
    """Alive rows within ``radius`` of row i, by whichever path is cheaper."""
    n_alive = int(alive.sum()) if alive.dtype == bool else len(alive)
    if inst.ball_cost(radius) < inst.scan_cost(n_alive):
        members = inst.ball_members(i, radius)
        return members[alive[members]]
    rows = np.flatnonzero(alive)
    return rows[inst.distances_to(i, rows) <= radius]


def _target_mass(epsilon: float) -> float:
    return 1.0 - epsilon - MASS_TOL


def _heaviest_prefix_count(weights: np.ndarray, epsilon: float) -> int:
    """Fewest heaviest atoms whose mass reaches 1 - epsilon (weights sorted descending)."""
    cum = np.cumsum(weights)
    return int(min(np.searchsorted(cum, _target_mass(epsilon), side="left") + 1, len(weights)))


def greedy_upper(inst: _Instance, epsilon: float) -> tuple[int, np.ndarray]:
    """Balls of radius epsilon/2 centered on the heaviest uncovered word."""
    radius = ball_radius(epsilon, inst.length)
    if radius == 0:
        k = _heaviest_prefix_count(inst.weights, epsilon)
        return k, np.arange(k)
    alive = np.ones(inst.n, dtype=bool)
    covered, centers, cursor = 0.0, [], 0
    target = _target_mass(epsilon)
    while covered < target:
        while not alive[cursor]:
            cursor += 1
        hits = _neighbors(inst, cursor, radius, alive)
        alive[hits] = False
        covered += float(inst.weights[hits].sum())
        centers.append(cursor)
    return len(centers), np.asarray(centers, dtype=np.int64)


def separated_lower(inst: _Instance, epsilon: float) -> tuple[int, np.ndarray]:
    """Lower bound from a first-fit family of words pairwise more than epsilon apart."""
    thr = mismatch_threshold(epsilon, inst.length)
    if thr == 0:
        family = np.arange(inst.n)
    else:
        free = np.ones(inst.n, dtype=bool)
        chosen = []
        for i in range(inst.n):
            if not free[i]:
                continue
            chosen.append(i)
            free[_neighbors(inst, i, thr, free)] = False
        family = np.asarray(chosen, dtype=np.int64)
    w = inst.weights[family]
    # lightest family members that could all stay uncovered
    dropped = int(np.searchsorted(np.cumsum(np.sort(w)), epsilon + MASS_TOL, side="right"))
    return max(1, len(family) - dropped), family


def _adjacency(inst: _Instance, thr: int) -> list[int]:
    adj = []
    rows = np.arange(inst.n)
    for i in range(inst.n):
        near = rows[inst.distances_to(i, rows) <= thr]
        adj.append(sum(1 << int(j) for j in near if j != i))
    return adj


def maximal_cliques(adj: list[int]) -> list[int]:
    """Bron-Kerbosch with pivoting over bitmask adjacency."""
    out: list[int] = []

    def expand(r: int, p: int, x: int):
        if not p and not x:
            out.append(r)
            return
        pivot_pool = p | x
        pivot = max((v for v in _bits(pivot_pool)), key=lambda v: (adj[v] & p).bit_count())
        for v in _bits(p & ~adj[pivot]):
            bit = 1 << v
            expand(r | bit, p & adj[v], x & adj[v])
            p &= ~bit
            x |= bit

    expand(0, (1 << len(adj)) - 1, 0)
    return out


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def exact_cover(inst: _Instance, epsilon: float, incumbent: int | None = None) -> int:
    """Minimum number of diameter-epsilon sets covering mass 1 - epsilon."""
    if inst.n > EXACT_CAP:
        raise UnsupportedOperation(f"exact covering is capped at {EXACT_CAP} distinct words, got {inst.n}")
    thr = mismatch_threshold(epsilon, inst.length)
    if thr == 0:
        return _heaviest_prefix_count(inst.weights, epsilon)
    cliques = maximal_cliques(_adjacency(inst, thr))
    w = inst.weights.tolist()
    target = _target_mass(epsilon)
    by_vertex = [[c for c in cliques if c >> v & 1] for v in range(inst.n)]

    def mass(mask: int) -> float:
        return sum(w[v] for v in _bits(mask))

    best = incumbent if incumbent is not None else greedy_upper(inst, epsilon)[0]

    def search(covered: int, covered_mass: float, skipped: int, skipped_mass: float, used: int):
        nonlocal best
        if covered_mass >= target:
            best = min(best, used)
            return
        need = target - covered_mass
        gain = max(mass(c & ~covered) for c in cliques)
        if gain <= 0 or used + math.ceil(need / gain - 1e-12) >= best:
            return
        undecided = ~(covered | skipped) & ((1 << inst.n) - 1)
        if not undecided:
            return
        v = (undecided & -undecided).bit_length() - 1  # rows are sorted by weight
        for c in sorted(by_vertex[v], key=lambda c: -mass(c & ~covered)):
            new = c & ~covered
            search(covered | c, covered_mass + mass(new), skipped, skipped_mass, used + 1)
        if skipped_mass + w[v] <= epsilon + MASS_TOL:
            search(covered, covered_mass, skipped | (1 << v), skipped_mass + w[v], used)

    search(0, 0.0, 0, 0.0, 0)
    return best


def cover_estimate(sample: NameSample, epsilon: float, mode: str = "bracket") -> CoverEstimate:
    """Covering number of ``sample`` at ``epsilon``.

    ``greedy`` gives only the upper bound (lower is the trivial 1), ``bracket``
    adds the separated-family lower bound, ``exact`` solves to optimality
    (at most 24 distinct words) and ``auto`` brackets, then solves exactly when
    the instance is small enough.
    """
    _check_epsilon(epsilon)
    if mode not in ("exact", "greedy", "bracket", "auto"):
        raise InvalidArgument(f"unknown covering mode {mode!r}")
    inst = _Instance(sample)
    if mode == "exact" and inst.n > EXACT_CAP:
        raise UnsupportedOperation(f"exact covering is capped at {EXACT_CAP} distinct words, got {inst.n}")
    upper, centers = greedy_upper(inst, epsilon)
    centers_words = inst.words[centers]
    if mode == "greedy":
        return CoverEstimate(1, upper, epsilon, None, "greedy", inst.n, centers=centers_words)
    lower, _ = separated_lower(inst, epsilon)
    exact = lower if lower == upper else None
    if mode == "exact" or (mode == "auto" and exact is None and inst.n <= EXACT_CAP):
        exact = exact_cover(inst, epsilon, incumbent=upper)
    if mode == "exact":
        return CoverEstimate(exact, exact, epsilon, exact, "exact", inst.n, centers=centers_words)
    if mode == "auto" and exact is not None:
        return CoverEstimate(exact, exact, epsilon, exact, "auto", inst.n, centers=centers_words)
    return CoverEstimate(lower, upper, epsilon, exact, mode, inst.n, centers=centers_words)
