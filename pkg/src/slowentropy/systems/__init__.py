"""Explicitly constructed measure-preserving systems, partitions and factor maps."""
from .build import build, build_factor, build_partition
from .core import (
    Bernoulli, CircleGroup, CyclicGroup, CyclicRotation, GroupCocycle, Odometer, Product, Rotation,
    SkewProduct, System, trivial_system,
)
from .factors import (
    ComposedFactor, EmpiricalFactor, FactorMap, IdentityFactor, ProductProjection, QuotientFactor,
    SkewProjection, TrivialFactor,
)
from .fixedpoint import continued_fraction_denominators, quadratic_irrational
from .partitions import (
    BasePartition, ConstantPartition, CylinderPartition, FiberPartition, FirstPartition, FunctionPartition,
    GroupPartition, IntervalPartition, JoinPartition, Partition, PullbackPartition, ResiduePartition,
    SecondPartition, pullback_partition,
)
from .points import CircleCoord, GroupElem, Pair, Square, SymbolStream


def step(system: System, x, k: int = 1):
    """``T^k x``."""
    return system.step(x, k)


__all__ = [
    "build", "build_factor", "build_partition", "step",
    "System", "Bernoulli", "Rotation", "CyclicRotation", "Odometer", "SkewProduct", "Product",
    "CyclicGroup", "CircleGroup", "GroupCocycle", "trivial_system",
    "FactorMap", "IdentityFactor", "TrivialFactor", "SkewProjection", "ProductProjection",
    "QuotientFactor", "ComposedFactor", "EmpiricalFactor",
    "Partition", "ConstantPartition", "CylinderPartition", "IntervalPartition", "ResiduePartition",
    "GroupPartition", "FirstPartition", "SecondPartition", "BasePartition", "FiberPartition",
    "JoinPartition", "PullbackPartition", "FunctionPartition", "pullback_partition",
    "SymbolStream", "CircleCoord", "GroupElem", "Pair", "Square",
    "quadratic_irrational", "continued_fraction_denominators",
]
