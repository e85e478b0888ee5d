"""128-bit fixed-point arithmetic on the circle R/Z.

A circle coordinate is an integer ``v`` in ``[0, 2**128)`` standing for ``v / 2**128``.
Batches are stored as two ``uint64`` arrays (high and low words) so that
rotation by an integer multiple of the angle stays exact under numpy.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt

import numpy as np

BITS = 128
ONE = 1 << BITS
MASK = ONE - 1
MASK64 = (1 << 64) - 1


def split(value: int) -> tuple[int, int]:
    value &= MASK
    return value >> 64, value & MASK64


def join(hi: int, lo: int) -> int:
    return (int(hi) << 64) | int(lo)


def from_fraction(x) -> int:
    """Truncate a real in [0, 1) to fixed point. Floats are converted exactly."""
    frac = Fraction(x)
    if not 0 <= frac < 1:
        raise ValueError(f"circle coordinate {x!r} outside [0, 1)")
    return (frac.numerator << BITS) // frac.denominator


def to_float(value: int) -> float:
    return value / ONE


def quadratic_irrational(name) -> int:
    """Fixed-point truncation of a named quadratic irrational in (0, 1).

    ``"golden"`` is (sqrt(5) - 1) / 2, ``"silver"`` is sqrt(2) - 1, and
    ``{"sqrt": d}`` is the fractional part of sqrt(d) for non-square ``d``.
    """
    if name == "golden":
        return (isqrt(5 << (2 * BITS)) - ONE) >> 1
    if name == "silver":
        return isqrt(2 << (2 * BITS)) - ONE
    if isinstance(name, dict) and "sqrt" in name:
        d = int(name["sqrt"])
        if isqrt(d) ** 2 == d:
            raise ValueError(f"sqrt({d}) is rational")
        return isqrt(d << (2 * BITS)) & MASK
    raise ValueError(f"unknown quadratic irrational {name!r}")


def continued_fraction_denominators(value: int, count: int) -> list[int]:
    """Denominators q_1 < q_2 < ... of the convergents of ``value / 2**128``.

    Only denominators fully determined by the fixed-point truncation are
    returned, so the list can be shorter than ``count``.
    """
    num, den = value, ONE
    q_prev, q = 0, 1
    out: list[int] = []
    # expansion of value/ONE = [0; a1, a2, ...]
    while num and len(out) < count:
        a, rem = divmod(den, num)
        den, num = num, rem
        q_prev, q = q, a * q + q_prev
        # the tail of the expansion is polluted by truncation once q ~ 2**64
        if q.bit_length() > BITS // 2 - 8:
            break
        if not out or q > out[-1]:
            out.append(q)
    return out


class CircleArray:
    """Batch of circle coordinates (hi, lo) words."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: np.ndarray, lo: np.ndarray):
        self.hi = np.asarray(hi, dtype=np.uint64)
        self.lo = np.asarray(lo, dtype=np.uint64)

    @classmethod
    def from_ints(cls, values) -> "CircleArray":
        hi = np.fromiter((split(v)[0] for v in values), dtype=np.uint64)
        lo = np.fromiter((split(v)[1] for v in values), dtype=np.uint64)
        return cls(hi, lo)

    def to_ints(self) -> list[int]:
        return [join(h, l) for h, l in zip(self.hi.tolist(), self.lo.tolist())]

    def __len__(self) -> int:
        return len(self.hi)

    def add(self, delta: int) -> "CircleArray":
        dh, dl = split(delta)
        lo = self.lo + np.uint64(dl)
        carry = (lo < self.lo).astype(np.uint64)
        hi = self.hi + np.uint64(dh) + carry
        return CircleArray(hi, lo)

    def add_array(self, other: "CircleArray") -> "CircleArray":
        lo = self.lo + other.lo
        carry = (lo < self.lo).astype(np.uint64)
        return CircleArray(self.hi + other.hi + carry, lo)

    def geq(self, value: int) -> np.ndarray:
        """Elementwise ``self >= value`` in fixed-point order."""
        vh, vl = split(value)
        vh, vl = np.uint64(vh), np.uint64(vl)
        return (self.hi > vh) | ((self.hi == vh) & (self.lo >= vl))

    def take(self, idx) -> "CircleArray":
        return CircleArray(self.hi[idx], self.lo[idx])

    @staticmethod
    def concat(parts) -> "CircleArray":
        return CircleArray(np.concatenate([p.hi for p in parts]), np.concatenate([p.lo for p in parts]))

    def as_float(self) -> np.ndarray:
        return self.hi.astype(np.float64) / 2.0**64
