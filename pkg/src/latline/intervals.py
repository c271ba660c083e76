"""Finite disjoint unions of closed intervals on the line.

Endpoints are mpfr values at whatever precision the producer chose; the
constructor sorts, drops empties and merges overlaps/touches, so measure,
union and intersection are exact set algebra on the represented endpoints.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from ._context import workprec

__all__ = ["IntervalSet"]


class IntervalSet:
    """Sorted disjoint closed intervals [lo, hi], lo <= hi."""

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        cleaned = []
        for lo, hi in sorted(parts, key=lambda p: (p[0], p[1])):
            if hi < lo:
                continue
            if cleaned and lo <= cleaned[-1][1]:
                if hi > cleaned[-1][1]:
                    cleaned[-1] = (cleaned[-1][0], hi)
            else:
                cleaned.append((lo, hi))
        self.parts = tuple((lo, hi) for lo, hi in cleaned)

    @classmethod
    def single(cls, lo, hi) -> "IntervalSet":
        return cls([(lo, hi)])

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    def is_empty(self) -> bool:
        return not self.parts

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def measure(self, bits: int = 256) -> mpfr:
        with workprec(bits):
            total = mpfr(0)
            for lo, hi in self.parts:
                total += hi - lo
            return total

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self.parts) + list(other.parts))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        a, b = self.parts, other.parts
        while i < len(a) and j < len(b):
            lo = a[i][0] if a[i][0] > b[j][0] else b[j][0]
            hi = a[i][1] if a[i][1] < b[j][1] else b[j][1]
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def clip(self, lo, hi) -> "IntervalSet":
        return self.intersection(IntervalSet.single(lo, hi))

    def contains_point(self, x) -> bool:
        for lo, hi in self.parts:
            if lo <= x <= hi:
                return True
            if lo > x:
                return False
        return False

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.parts == other.parts

    def __repr__(self):
        return f"IntervalSet({len(self.parts)} parts, measure~{float(self.measure(64)):.3g})"
