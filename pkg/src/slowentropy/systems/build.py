"""Build systems, partitions and factor maps from JSON-style specs."""
from __future__ import annotations

from fractions import Fraction

from ..errors import InvalidArgument
from .core import (
    Bernoulli, CircleGroup, CyclicGroup, CyclicRotation, GroupCocycle, Odometer, Product, Rotation,
    SkewProduct, System, trivial_system,
)
from .factors import (
    ComposedFactor, EmpiricalFactor, FactorMap, IdentityFactor, ProductProjection, QuotientFactor,
    SkewProjection, TrivialFactor,
)
from .partitions import (
    ConstantPartition, CylinderPartition, FirstPartition, GroupPartition, IntervalPartition, JoinPartition,
    Partition, ResiduePartition, SecondPartition,
)


def _angle(value):
    if isinstance(value, (str, dict)):
        return value
    if isinstance(value, list) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    return Fraction(value)


def build(spec: dict) -> System:
    """System from a spec such as ``{"kind": "bernoulli", "p": [0.5, 0.5]}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidArgument("system spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "bernoulli":
        return Bernoulli(spec["p"])
    if kind == "rotation":
        return Rotation(_angle(spec.get("theta", "golden")))
    if kind == "odometer":
        return Odometer(spec["base"], spec.get("digits", 8))
    if kind == "cyclic":
        return CyclicRotation(spec["order"], spec.get("step", 1))
    if kind == "trivial":
        return trivial_system()
    if kind == "product":
        return Product(build(spec["first"]), build(spec["second"]))
    if kind == "skew":
        base = build(spec["base"])
        gspec = spec.get("group", {"kind": "cyclic", "order": 1})
        if gspec.get("kind") == "cyclic":
            group = CyclicGroup(gspec["order"])
        elif gspec.get("kind") == "circle":
            group = CircleGroup()
        else:
            raise InvalidArgument(f"unknown fiber group {gspec!r}")
        cspec = spec.get("cocycle", {"value": 1})
        if "partition" in cspec:
            part = build_partition(base, cspec["partition"])
            vals = cspec["values"]
            if group.kind == "circle":
                vals = [_angle(v) for v in vals]
            cocycle = GroupCocycle(group, vals, part)
        else:
            value = cspec.get("value", 1)
            cocycle = GroupCocycle(group, [_angle(value) if group.kind == "circle" else value])
        return SkewProduct(base, group, cocycle)
    raise InvalidArgument(f"unknown system kind {kind!r}")


def build_partition(system: System, spec: dict) -> Partition:
    """Partition of ``system`` from a spec.

    Kinds: ``constant``; ``cylinder`` (shift, optional ``length``);
    ``intervals`` (``cuts`` in [0,1), or ``cells`` equal arcs, or dyadic ``depth``);
    ``residue`` and ``group`` (cyclic systems); ``base`` / ``fiber`` / ``first`` /
    ``second`` wrapping an ``inner`` spec for pair systems; ``join`` of ``parts``.
    """
    kind = spec.get("kind")
    if kind == "constant":
        return ConstantPartition()
    if kind == "cylinder":
        if not isinstance(system, Bernoulli):
            raise InvalidArgument("cylinder partitions need a shift")
        return CylinderPartition(system.r, spec.get("length", 1))
    if kind == "intervals":
        if "cuts" in spec:
            return IntervalPartition([_angle(c) for c in spec["cuts"]])
        if "depth" in spec:
            return IntervalPartition.dyadic(spec["depth"])
        return IntervalPartition.equal(spec.get("cells", 2))
    if kind == "residue":
        return ResiduePartition(spec["modulus"])
    if kind == "group":
        order = getattr(system, "order", None)
        if "assignment" in spec:
            return GroupPartition(spec["assignment"])
        if order is None:
            raise InvalidArgument("group partition needs an 'assignment' or a cyclic system")
        return GroupPartition.singletons(order)
    if kind in ("base", "first"):
        sub = system.base if isinstance(system, SkewProduct) else system.first
        return FirstPartition(build_partition(sub, spec["inner"]))
    if kind in ("fiber", "second"):
        if isinstance(system, SkewProduct):
            inner = spec.get("inner", {"kind": "group"})
            if system.group.kind == "circle":
                return SecondPartition(build_partition(Rotation(0), inner))
            return SecondPartition(build_partition(CyclicRotation(system.group.order), inner))
        return SecondPartition(build_partition(system.second, spec["inner"]))
    if kind == "join":
        return JoinPartition(*[build_partition(system, p) for p in spec["parts"]])
    raise InvalidArgument(f"unknown partition kind {kind!r}")


def build_factor(system: System, spec: dict | None) -> FactorMap:
    """Factor map out of ``system``; ``None`` means the trivial factor."""
    if spec is None:
        return TrivialFactor(system)
    kind = spec.get("kind")
    if kind == "trivial":
        return TrivialFactor(system)
    if kind == "identity":
        return IdentityFactor(system)
    if kind == "skew_projection":
        factor = SkewProjection(system)
        depth = int(spec.get("depth", 1))
        for _ in range(depth - 1):
            factor = ComposedFactor(factor, SkewProjection(factor.target))
        base = factor
    elif kind == "product_projection":
        base = ProductProjection(system, spec.get("keep", 0))
    elif kind == "quotient":
        base = QuotientFactor(system, spec["divisor"])
    else:
        raise InvalidArgument(f"unknown factor kind {kind!r}")
    if spec.get("empirical"):
        q = build_partition(base.target, spec["target_partition"])
        return EmpiricalFactor(base, q, spec.get("window", 12), spec.get("floor", 50))
    return base
