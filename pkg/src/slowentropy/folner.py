"""Finite observation windows in Z and the sequences built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgument

MAX_SIZE = 1 << 22


@dataclass(frozen=True, eq=False)
class FolnerSet:
    """Sorted, duplicate-free, nonempty set of integers."""

    elements: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.elements, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidArgument("a Folner set must be a nonempty 1-d collection")
        if arr.size > MAX_SIZE:
            raise InvalidArgument(f"Folner set of size {arr.size} exceeds cap {MAX_SIZE}")
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise InvalidArgument("Folner set elements must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    @classmethod
    def from_iterable(cls, values) -> "FolnerSet":
        return cls(np.unique(np.fromiter(values, dtype=np.int64)))

    def __len__(self) -> int:
        return int(self.elements.size)

    def __iter__(self):
        return iter(self.elements.tolist())

    def __contains__(self, g) -> bool:
        i = np.searchsorted(self.elements, g)
        return bool(i < self.elements.size and self.elements[i] == g)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FolnerSet):
            return NotImplemented
        return np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash(self.elements.tobytes())

    def __repr__(self) -> str:
        if len(self) <= 8:
            return f"FolnerSet({self.elements.tolist()})"
        return f"FolnerSet(size={len(self)}, min={self.min}, max={self.max})"

    @property
    def min(self) -> int:
        return int(self.elements[0])

    @property
    def max(self) -> int:
        return int(self.elements[-1])


def make_interval(n: int) -> FolnerSet:
    """The window ``{0, 1, ..., n-1}``."""
    if int(n) != n or n < 1:
        raise InvalidArgument(f"interval length must be a positive integer, got {n!r}")
    if n > MAX_SIZE:
        raise InvalidArgument(f"interval length {n} exceeds cap {MAX_SIZE}")
    return FolnerSet(np.arange(int(n), dtype=np.int64))


def make_union(anchors: Sequence[int], width: int) -> FolnerSet:
    """``[0, width)`` together with ``[a, a + width)`` for each anchor, overlaps merged."""
    if int(width) != width or width < 1:
        raise InvalidArgument(f"width must be a positive integer, got {width!r}")
    anchors = [int(a) for a in anchors]
    if any(a < 0 for a in anchors):
        raise InvalidArgument("anchors must be nonnegative")
    if any(b <= a for a, b in zip(anchors, anchors[1:])):
        raise InvalidArgument("anchors must be strictly increasing")
    if (len(anchors) + 1) * width > 4 * MAX_SIZE:
        raise InvalidArgument("union window too large to materialize")
    width = int(width)
    starts = np.array([0] + anchors, dtype=np.int64)
    elems = (starts[:, None] + np.arange(width, dtype=np.int64)[None, :]).ravel()
    return FolnerSet(np.unique(elems))


def defect(F: FolnerSet, g: int) -> float:
    """``|(g + F) & F| / |F|``: how nearly F is invariant under translation by g."""
    shifted = F.elements + np.int64(g)
    return np.intersect1d(shifted, F.elements, assume_unique=True).size / len(F)


def log_width(m: int, scale: float = 1.0) -> int:
    return max(1, int(math.floor(scale * math.log(m + 1))))


def sparsify_times(times: Sequence[int]) -> list[int]:
    """Thin a rigidity sequence so consecutive gaps satisfy ``n_{k+1} - n_k > k``."""
    out: list[int] = []
    for t in sorted(set(int(t) for t in times)):
        if t <= 0:
            continue
        if not out or t - out[-1] > len(out):
            out.append(t)
    return out


@dataclass(frozen=True)
class FolnerSequence:
    """Rule producing the n-th window, indexed from n = 1.

    Built-in kinds: ``interval`` ([0, n)), ``union`` (fixed anchors with blocks
    of width ``n * width``), ``rigidity`` (the first m-1 rigidity times with
    blocks of width V(m)), and ``explicit`` (a list of sets).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("interval", "union", "rigidity", "explicit"):
            raise InvalidArgument(f"unknown Folner rule {self.kind!r}")
        if self.kind == "rigidity":
            times = sparsify_times(self.params.get("rigidity_times", ()))
            if not times:
                raise InvalidArgument("rigidity rule needs at least one positive time")
            self.params["rigidity_times"] = times
            rule = self.params.setdefault("width_rule", "log")
            if rule not in ("log", "constant"):
                raise InvalidArgument(f"unknown width_rule {rule!r}")
        if self.kind == "explicit" and not self.params.get("sets"):
            raise InvalidArgument("explicit rule needs a nonempty list of sets")

    @classmethod
    def interval(cls) -> "FolnerSequence":
        return cls("interval")

    @classmethod
    def union(cls, anchors, width: int = 1) -> "FolnerSequence":
        make_union(anchors, width)  # validate eagerly
        return cls("union", {"anchors": list(anchors), "width": int(width)})

    @classmethod
    def rigidity(cls, rigidity_times, width_rule: str = "log", scale: float = 1.0,
                 width: int = 1) -> "FolnerSequence":
        return cls("rigidity", {"rigidity_times": list(rigidity_times), "width_rule": width_rule,
                                "scale": float(scale), "width": int(width)})

    @classmethod
    def explicit(cls, sets) -> "FolnerSequence":
        return cls("explicit", {"sets": [s if isinstance(s, FolnerSet) else FolnerSet.from_iterable(s)
                                         for s in sets]})

    @classmethod
    def from_config(cls, cfg: dict) -> "FolnerSequence":
        kind = cfg.get("kind", "interval")
        if kind == "interval":
            return cls.interval()
        if kind == "union":
            return cls.union(cfg.get("anchors", []), cfg.get("width", 1))
        if kind == "rigidity":
            return cls.rigidity(cfg["rigidity_times"], cfg.get("width_rule", "log"),
                                cfg.get("scale", 1.0), cfg.get("width", 1))
        if kind == "explicit":
            return cls.explicit(cfg["sets"])
        raise InvalidArgument(f"unknown Folner rule {kind!r}")

    @property
    def max_index(self) -> int | None:
        if self.kind == "rigidity":
            return len(self.params["rigidity_times"]) + 1
        if self.kind == "explicit":
            return len(self.params["sets"])
        return None

    def width(self, m: int) -> int:
        if self.params.get("width_rule") == "constant":
            return self.params.get("width", 1)
        return log_width(m, self.params.get("scale", 1.0))

    def __call__(self, n: int) -> FolnerSet:
        if int(n) != n or n < 1:
            raise InvalidArgument(f"sequence index must be >= 1, got {n!r}")
        n = int(n)
        if self.kind == "interval":
            return make_interval(n)
        if self.kind == "union":
            return make_union(self.params["anchors"], n * self.params["width"])
        if self.kind == "rigidity":
            times = self.params["rigidity_times"]
            if n - 1 > len(times):
                raise InvalidArgument(f"only {len(times)} rigidity times; index {n} too large")
            return make_union(times[: n - 1], self.width(n))
        sets = self.params["sets"]
        if n > len(sets):
            raise InvalidArgument(f"explicit sequence has {len(sets)} sets; index {n} too large")
        return sets[n - 1]

    def describe(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.params.items():
            out[k] = [s.elements.tolist() for s in v] if k == "sets" else v
        return out

