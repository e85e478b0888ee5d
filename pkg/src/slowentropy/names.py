"""(P, F)-names, the normalized Hamming distance, and weighted name samples."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .folner import FolnerSet
from .systems.core import System
from .systems.partitions import Partition

_NIBBLE_LOW = np.uint64(0x1111111111111111)
_BYTE_LOW = np.uint64(0x0101010101010101)


@dataclass(frozen=True)
class Word:
    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    @classmethod
    def parse(cls, text: str) -> "Word":
        if "." in text:
            return cls(tuple(int(t) for t in text.split(".")))
        return cls(tuple(int(c, 36) for c in text))

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        if all(s < 36 for s in self.symbols):
            return "".join(np.base_repr(s, 36).lower() for s in self.symbols)
        return ".".join(map(str, self.symbols))


def _as_array(w) -> np.ndarray:
    if isinstance(w, str):
        w = Word.parse(w)
    return np.asarray(w.symbols if isinstance(w, Word) else w, dtype=np.int64)


def hamming_distance(w1, w2) -> float:
    """Fraction of positions where the two words differ."""
    a, b = _as_array(w1), _as_array(w2)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgument(f"words of lengths {a.size} and {b.size} are not comparable")
    if a.size == 0:
        return 0.0
    return float(np.count_nonzero(a != b)) / a.size


def extract_name(system: System, partition: Partition, x, F: FolnerSet) -> Word:
    state = system.to_state([x])
    return Word(system.orbit_labels(state, partition, F.elements)[0])


def name_matrix(system: System, partition: Partition, state, F: FolnerSet) -> np.ndarray:
    """(N, |F|) uint8 names of a batch of points."""
    if partition.size > 256:
        raise InvalidArgument("partitions with more than 256 cells are not supported")
    return system.orbit_labels(state, partition, F.elements).astype(np.uint8)


def partition_distance(system: System, state, P: Partition, Q: Partition, weights=None) -> float:
    """Weighted mass of the points where P and Q disagree."""
    if P.size != Q.size:
        raise InvalidArgument(f"partition sizes differ: {P.size} vs {Q.size}")
    n = len(state)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise InvalidArgument("one weight per point required")
    diff = P.labels(state) != Q.labels(state)
    return float(w[diff].sum() / w.sum())


def symbols_per_word(r: int) -> int:
    return 16 if r <= 16 else 8


def pack_words(words: np.ndarray, r: int) -> np.ndarray:
    """Pack (N, L) symbols into (N, ceil(L/k)) uint64, k = 16 nibbles or 8 bytes per word."""
    words = np.asarray(words, dtype=np.uint8)
    n, length = words.shape
    per = symbols_per_word(r)
    cols = max(1, -(-length // per))
    padded = np.zeros((n, cols * per), dtype=np.uint8)
    padded[:, :length] = words
    if per == 16:
        padded = (padded[:, 0::2] | (padded[:, 1::2] << 4)).astype(np.uint8)
    return np.ascontiguousarray(padded).view(np.uint64).reshape(n, cols)


def mismatch_counts(packed: np.ndarray, center: np.ndarray, r: int) -> np.ndarray:
    """Number of differing symbols between every row of ``packed`` and ``center``."""
    x = packed ^ center
    if symbols_per_word(r) == 16:
        x = x | (x >> np.uint64(1))
        x = x | (x >> np.uint64(2))
        x &= _NIBBLE_LOW
    else:
        x = x | (x >> np.uint64(4))
        x = x | (x >> np.uint64(2))
        x = x | (x >> np.uint64(1))
        x &= _BYTE_LOW
    return np.bitwise_count(x).sum(axis=1, dtype=np.int64)


def pairwise_mismatches(packed: np.ndarray, r: int) -> np.ndarray:
    n = packed.shape[0]
    out = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        out[i] = mismatch_counts(packed, packed[i], r)
    return out


@dataclass
class NameSample:
    """Weighted multiset of words of common length over ``{0, ..., r-1}``."""

    words: np.ndarray
    weights: np.ndarray
    r: int
    window: FolnerSet | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        words = np.asarray(self.words)
        if words.ndim != 2 or words.shape[0] == 0:
            raise InvalidArgument("a name sample needs a nonempty 2-d word array")
        if words.size and (words.min() < 0 or words.max() >= self.r):
            raise InvalidArgument(f"symbols must lie in [0, {self.r})")
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.shape != (words.shape[0],) or np.any(weights < 0):
            raise InvalidArgument("weights must be nonnegative, one per word")
        total = weights.sum()
        if total <= 0:
            raise InvalidArgument("weights sum to zero")
        if abs(total - 1.0) > 1e-9:
            weights = weights / total
        if self.window is not None and len(self.window) != words.shape[1]:
            raise InvalidArgument("word length must equal the window size")
        self.words = words.astype(np.uint8)
        self.weights = weights

    @classmethod
    def from_words(cls, words, weights=None, r: int | None = None, **kw) -> "NameSample":
        arr = np.array([_as_array(w) for w in words], dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if r is None:
            r = max(2, int(arr.max()) + 1)
        if weights is None:
            weights = np.full(len(arr), 1.0 / len(arr))
        return cls(arr, weights, r, **kw)

    def __len__(self):
        return self.words.shape[0]

    @property
    def length(self) -> int:
        return self.words.shape[1]

    def word(self, i: int) -> Word:
        return Word(self.words[i])

    def dedup(self) -> "NameSample":
        """Merge repeated words, summing weights; rows sorted lexicographically."""
        uniq, inverse = np.unique(self.words, axis=0, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights=self.weights, minlength=len(uniq))
        return NameSample(uniq, weights, self.r, self.window, dict(self.provenance, deduplicated=True))

    def packed(self) -> np.ndarray:
        return pack_words(self.words, self.r)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "weight"])
        for i in range(len(self)):
            writer.writerow([str(self.word(i)), format(self.weights[i], ".9g")])
        return buf.getvalue()


def names_from_states(system: System, partition: Partition, F: FolnerSet, state, weights,
                      provenance: dict | None = None) -> NameSample:
    words = name_matrix(system, partition, state, F)
    return NameSample(words, weights, max(partition.size, 1), F, provenance or {})


def collect_name_sample(system: System, partition: Partition, F: FolnerSet, mode: str = "monte_carlo",
                        n_samples: int = 4096, seed=0) -> NameSample:
    """Name distribution of ``partition`` over ``F``.

    ``exact`` weighs each enumerated atom by its exact mass; ``monte_carlo``
    draws ``n_samples`` points from ``seed`` with weight 1/N each.
    """
    if mode == "exact":
        state, weights = system.exact_support([partition], F.elements)
        return names_from_states(system, partition, F, state, weights, {"mode": "exact"})
    if mode == "monte_carlo":
        if n_samples < 1:
            raise InvalidArgument("n_samples must be positive")
        state = system.sample_state(n_samples, seed)
        weights = np.full(n_samples, 1.0 / n_samples)
        return names_from_states(system, partition, F, state, weights,
                                 {"mode": "monte_carlo", "seed": seed, "n": n_samples})
    raise InvalidArgument(f"unknown sampling mode {mode!r}")
