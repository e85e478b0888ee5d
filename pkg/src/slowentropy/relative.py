"""Relative covering numbers over a factor map.

The fiberwise covering numbers are computed at a common epsilon and the
relative value is their weighted lower (1 - epsilon)-quantile over the base.
"""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .covering import MASS_TOL, CoverEstimate, cover_estimate
from .errors import InvalidArgument, UnsupportedOperation
from .folner import FolnerSet
from .names import NameSample
from .systems.factors import FactorMap
from .systems.partitions import Partition

DEFAULT_BASE_BUDGET = 256
DEFAULT_FIBER_BUDGET = 512


@dataclass
class FiberBatch:
    base_weights: np.ndarray
    fibers: list
    base_state: object = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.base_weights, dtype=np.float64)
        if w.size == 0 or w.size != len(self.fibers):
            raise InvalidArgument("need one base weight per fiber and at least one fiber")
        self.base_weights = w / w.sum()

    def __len__(self):
        return len(self.fibers)


@dataclass
class RelativeCoverEstimate:
    value_lower: int
    value_upper: int
    epsilon: float
    per_fiber: list
    base_weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.value_lower > self.value_upper:
            raise AssertionError("relative lower bound exceeds upper bound")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["y_index", "weight", "lower", "upper"])
        for i, est in enumerate(self.per_fiber):
            writer.writerow([i, format(self.base_weights[i], ".9g"), est.lower, est.upper])
        return buf.getvalue()


def weighted_lower_quantile(values, weights, epsilon: float) -> int:
    """Smallest M with total weight of ``{values <= M}`` at least ``1 - epsilon``."""
    values = np.asarray(values)
    weights = np.asarray(weights, dtype=np.float64)
    if values.size == 0:
        raise InvalidArgument("empty base sample")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order]) / weights.sum()
    idx = int(np.searchsorted(cum, 1.0 - epsilon - MASS_TOL, side="left"))
    return int(values[order][min(idx, values.size - 1)])


def _split_names(words: np.ndarray, weights: np.ndarray, owner: np.ndarray, n_base: int, r: int,
                 F: FolnerSet, provenance: dict) -> list[NameSample]:
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(n_base + 1))
    out = []
    for i in range(n_base):
        rows = order[bounds[i]:bounds[i + 1]]
        if rows.size == 0:
            raise InvalidArgument(f"fiber {i} is empty")
        out.append(NameSample(words[rows], weights[rows], r, F, dict(provenance)))
    return out


def fibers_for_state(factor: FactorMap, y_state, partition: Partition, F: FolnerSet,
                     budget: int = DEFAULT_FIBER_BUDGET, seed=0) -> list[NameSample]:
    exact = factor.fiber_kind != "empirical"
    try:
        x, w, owner = factor.fiber_states(y_state, [partition], F.elements, budget, seed, exact)
    except UnsupportedOperation:
        if not exact:
            raise
        exact = False
        x, w, owner = factor.fiber_states(y_state, [partition], F.elements, budget, seed, exact)
    words = factor.source.orbit_labels(x, partition, F.elements).astype(np.uint8)
    prov = {"fiber": factor.fiber_kind, "exact": exact}
    return _split_names(words, w, owner, len(y_state), max(partition.size, 1), F, prov)


def fiber_sample(factor: FactorMap, y, partition: Partition, F: FolnerSet,
                 budget: int = DEFAULT_FIBER_BUDGET, seed=0) -> NameSample:
    """Name distribution of ``partition`` over ``F`` under the fiber measure at ``y``."""
    return fibers_for_state(factor, factor.target.to_state([y]), partition, F, budget, seed)[0]


def collect_fibers(factor: FactorMap, partition: Partition, F: FolnerSet, base: str = "monte_carlo",
                   base_budget: int = DEFAULT_BASE_BUDGET, fiber_budget: int = DEFAULT_FIBER_BUDGET,
                   seed=0) -> FiberBatch:
    """Fibers over Monte Carlo base points, or over an exact enumeration of the base."""
    if base == "exact":
        y_state, wy = factor.target.exact_support(factor.base_leaves([partition]), factor.base_times(F.elements))
    elif base == "monte_carlo":
        if base_budget < 1:
            raise InvalidArgument("base_budget must be positive")
        base_seed, fiber_seed = np.random.SeedSequence(seed).generate_state(2)
        y_state = factor.target.sample_state(base_budget, int(base_seed))
        wy = np.full(base_budget, 1.0 / base_budget)
        seed = int(fiber_seed)
    else:
        raise InvalidArgument(f"unknown base mode {base!r}")
    fibers = fibers_for_state(factor, y_state, partition, F, fiber_budget, seed)
    return FiberBatch(wy, fibers, y_state, {"base": base, "n_base": len(fibers)})


def _fingerprint(sample: NameSample) -> bytes:
    s = sample.dedup()
    h = hashlib.blake2b(digest_size=16)
    h.update(s.words.tobytes())
    h.update(np.round(s.weights, 15).tobytes())
    h.update(bytes([s.r]))
    h.update(s.words.shape[1].to_bytes(4, "little"))
    return h.digest()


def relative_from_batch(batch: FiberBatch, epsilon: float, mode: str = "bracket") -> RelativeCoverEstimate:
    cache: dict[bytes, CoverEstimate] = {}
    per_fiber = []
    for fiber in batch.fibers:
        key = _fingerprint(fiber)
        if key not in cache:
            cache[key] = cover_estimate(fiber, epsilon, mode)
        per_fiber.append(cache[key])
    lows = [e.exact if e.exact is not None else e.lower for e in per_fiber]
    ups = [e.value for e in per_fiber]
    return RelativeCoverEstimate(weighted_lower_quantile(lows, batch.base_weights, epsilon),
                                 weighted_lower_quantile(ups, batch.base_weights, epsilon),
                                 epsilon, per_fiber, batch.base_weights)


def relative_cover(factor: FactorMap, partition: Partition, F: FolnerSet, epsilon: float,
                   base_budget: int = DEFAULT_BASE_BUDGET, mode: str = "bracket", base: str = "monte_carlo",
                   fiber_budget: int = DEFAULT_FIBER_BUDGET, seed=0) -> RelativeCoverEstimate:
    """Relative covering number of ``partition`` over ``F`` given ``factor``."""
    if not 0 < epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon!r}")
    batch = collect_fibers(factor, partition, F, base, base_budget, fiber_budget, seed)
    return relative_from_batch(batch, epsilon, mode)
