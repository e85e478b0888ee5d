"""Factor maps and their fibers.

``fiber_states`` is the workhorse of the relative computations: for a batch
of target points it returns source points representing each fiber measure,
as ``(state, weights, owner)`` where ``owner[i]`` is the target row that
source row ``i`` belongs to and weights sum to one within each owner.
"""
from __future__ import annotations

import numpy as np

from ..errors import InsufficientFiberData, InvalidArgument, UnsupportedOperation
from .core import CyclicRotation, Product, SkewProduct, System, trivial_system
from .partitions import Partition, PullbackPartition, pullback_partition
from .points import CyclicState, PairState, concat_states

DEFAULT_WINDOW = 12
DEFAULT_FLOOR = 50


def _leaves(partitions) -> list[Partition]:
    return [leaf for p in partitions for leaf in p.leaves()]


def _cross(y_state, fiber_state, fiber_weights, combine):
    """Every target row paired with every fiber element."""
    k = len(fiber_state)
    owner = np.repeat(np.arange(len(y_state)), k)
    tile = np.tile(np.arange(k), len(y_state))
    return combine(y_state.take(owner), fiber_state.take(tile)), np.tile(fiber_weights, len(y_state)), owner


class FactorMap:
    """Equivariant map ``source -> target``."""

    fiber_kind = "exact_skew"

    def __init__(self, source: System, target: System):
        self.source = source
        self.target = target

    def apply_state(self, state):
        raise NotImplementedError

    def apply(self, x):
        return self.target.from_state(self.apply_state(self.source.to_state([x])))[0]

    def fiber_states(self, y_state, partitions, times, budget: int = 256, seed=0, exact: bool = True):
        raise NotImplementedError

    def base_leaves(self, partitions) -> list[Partition]:
        """Target partitions whose labels pin down the fiber name distributions."""
        return _leaves(partitions)

    def base_times(self, times) -> list[int]:
        return list(times)

    def pullback(self, partition: Partition) -> Partition:
        return pullback_partition(self, partition)

    @property
    def label(self) -> str:
        return f"{type(self).__name__}({self.source.label} -> {self.target.label})"

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "fiber_kind": self.fiber_kind,
                "source": self.source.describe(), "target": self.target.describe()}


class IdentityFactor(FactorMap):
    def __init__(self, system: System):
        super().__init__(system, system)

    def apply_state(self, state):
        return state

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        n = len(y_state)
        return y_state, np.ones(n), np.arange(n)


class TrivialFactor(FactorMap):
    """Map onto the one-point system; the single fiber is the whole space."""

    fiber_kind = "whole_space"

    def __init__(self, system: System):
        super().__init__(system, trivial_system())

    def apply_state(self, state):
        return CyclicState(np.zeros(len(state), dtype=np.int64), 1)

    def base_leaves(self, partitions):
        return []

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        if exact:
            x, w = self.source.exact_support(partitions, times)
        else:
            x, w = self.source.sample_state(budget, seed), np.full(budget, 1.0 / budget)
        idx = np.tile(np.arange(len(x)), len(y_state))
        return x.take(idx), np.tile(w, len(y_state)), np.repeat(np.arange(len(y_state)), len(x))


class SkewProjection(FactorMap):
    """``(y, h) -> y``; the fiber over y is ``{y} x H`` with Haar measure."""

    def __init__(self, skew: SkewProduct):
        if not isinstance(skew, SkewProduct):
            raise InvalidArgument("SkewProjection needs a skew product")
        super().__init__(skew, skew.base)

    def apply_state(self, state):
        if not isinstance(state, PairState):
            raise InvalidArgument("point does not belong to a skew product")
        return state.first

    def base_leaves(self, partitions):
        return _leaves(partitions) + self.source.cocycle.leaves()

    def base_times(self, times):
        return self.source.base_times(times)

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        group = self.source.group
        if group.kind == "cyclic":
            h, w = group.enumerate()
        elif exact:
            raise UnsupportedOperation("circle fibers have no exact enumeration")
        else:
            h = group.random(budget, np.random.default_rng(seed))
            w = np.full(budget, 1.0 / budget)
        return _cross(y_state, h, w, PairState)


class ProductProjection(FactorMap):
    """Projection of ``X1 x X2`` onto one coordinate; fibers are copies of the other factor."""

    def __init__(self, product: Product, keep: int = 0):
        if not isinstance(product, Product) or keep not in (0, 1):
            raise InvalidArgument("ProductProjection needs a product system and keep in {0, 1}")
        self.keep = keep
        super().__init__(product, product.first if keep == 0 else product.second)

    @property
    def other(self) -> System:
        return self.source.second if self.keep == 0 else self.source.first

    def apply_state(self, state):
        if not isinstance(state, PairState):
            raise InvalidArgument("point does not belong to a product system")
        return state.first if self.keep == 0 else state.second

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        if exact:
            z, w = self.other.exact_support(_leaves(partitions), times)
        else:
            z, w = self.other.sample_state(budget, seed), np.full(budget, 1.0 / budget)
        if self.keep == 0:
            return _cross(y_state, z, w, PairState)
        return _cross(y_state, z, w, lambda a, b: PairState(b, a))


class QuotientFactor(FactorMap):
    """``Z/m -> Z/d`` by reduction mod d, for d dividing m."""

    def __init__(self, source: CyclicRotation, divisor: int):
        if not isinstance(source, CyclicRotation) or source.order % divisor:
            raise InvalidArgument(f"{divisor} must divide the order of a cyclic system")
        self.divisor = int(divisor)
        super().__init__(source, CyclicRotation(divisor, source.shift))

    def apply_state(self, state):
        return CyclicState(state.values % self.divisor, self.divisor)

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        k = self.source.order // self.divisor
        owner = np.repeat(np.arange(len(y_state)), k)
        vals = y_state.values[owner] + self.divisor * np.tile(np.arange(k), len(y_state))
        return CyclicState(vals, self.source.order), np.full(owner.size, 1.0 / k), owner


class ComposedFactor(FactorMap):
    """``outer . inner`` for ``inner: X -> Y`` and ``outer: Y -> Z``."""

    def __init__(self, inner: FactorMap, outer: FactorMap):
        if inner.target is not outer.source:
            raise InvalidArgument("factor maps do not compose")
        self.inner = inner
        self.outer = outer
        self.fiber_kind = "empirical" if "empirical" in (inner.fiber_kind, outer.fiber_kind) else "exact_skew"
        super().__init__(inner.source, outer.target)

    def apply_state(self, state):
        return self.outer.apply_state(self.inner.apply_state(state))

    def base_leaves(self, partitions):
        return self.outer.base_leaves(self.inner.base_leaves(partitions))

    def base_times(self, times):
        return self.outer.base_times(self.inner.base_times(times))

    def fiber_states(self, y_state, partitions, times, budget=256, seed=0, exact=True):
        mid, w1, own1 = self.outer.fiber_states(y_state, self.inner.base_leaves(partitions),
                                                self.inner.base_times(times), budget, seed, exact)
        x, w2, own2 = self.inner.fiber_states(mid, partitions, times, budget, seed, exact)
        return x, w1[own2] * w2, own1[own2]


class EmpiricalFactor(FactorMap):
    """Fibers approximated by conditioning source samples on the target name.

    A source sample belongs to the fiber of y when the ``(Q, [0, window))``
    name of its image equals that of y.
    """

    fiber_kind = "empirical"

    def __init__(self, factor: FactorMap, partition: Partition, window: int = DEFAULT_WINDOW,
                 floor: int = DEFAULT_FLOOR):
        if window < 1 or floor < 1:
            raise InvalidArgument("window and floor must be positive")
        self.factor = factor
        self.partition = partition
        self.window = int(window)
        self.floor = int(floor)
        super().__init__(factor.source, factor.target)

    def apply_state(self, state):
        return self.factor.apply_state(state)

    def _names(self, target_state) -> np.ndarray:
        labels = self.target.orbit_labels(target_state, self.partition, np.arange(self.window))
        return np.ascontiguousarray(labels)

    def fiber_states(self, y_state, partitions, times, budget=4096, seed=0, exact=False):
        pool = self.source.sample_state(budget, seed)
        pool_names = self._names(self.apply_state(pool))
        y_names = self._names(y_state)
        keys, inverse = np.unique(np.concatenate([pool_names, y_names]), axis=0, return_inverse=True)
        inverse = inverse.ravel()
        pool_keys, y_keys = inverse[:budget], inverse[budget:]
        parts, weights, owners = [], [], []
        for i, key in enumerate(y_keys):
            members = np.flatnonzero(pool_keys == key)
            if members.size < self.floor:
                raise InsufficientFiberData(
                    f"fiber {i} has {members.size} conditioned samples, floor is {self.floor}")
            parts.append(pool.take(members))
            weights.append(np.full(members.size, 1.0 / members.size))
            owners.append(np.full(members.size, i))
        return concat_states(parts), np.concatenate(weights), np.concatenate(owners)

    def describe(self):
        out = super().describe()
        out.update(window=self.window, floor=self.floor)
        return out


__all__ = [
    "FactorMap", "IdentityFactor", "TrivialFactor", "SkewProjection", "ProductProjection",
    "QuotientFactor", "ComposedFactor", "EmpiricalFactor", "PullbackPartition", "pullback_partition",
]
