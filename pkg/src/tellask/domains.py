"""Domain representations for finite-domain integer and finite-set variables.

Integer domains are ordered interval sets: a tuple of disjoint, non-adjacent
(lo, hi) pairs sorted ascending. Set domains are a pair of frozensets
glb <= lub; the variable is assigned when the two coincide. Both types are
immutable so spaces can share them across clones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundsError, DomainError

INT_MIN = -2147483645
INT_MAX = 2147483645


class IntDomain:
    """Immutable set of integers stored as sorted disjoint intervals."""

    __slots__ = ("ivs",)

    def __init__(self, ivs: tuple[tuple[int, int], ...]):
        self.ivs = ivs

    @staticmethod
    def range(lo: int, hi: int) -> "IntDomain":
        if lo > hi:
            raise BoundsError(f"empty range [{lo}, {hi}]")
        if lo < INT_MIN or hi > INT_MAX:
            raise BoundsError(f"range [{lo}, {hi}] outside [{INT_MIN}, {INT_MAX}]")
        return IntDomain(((lo, hi),))

    @property
    def empty(self) -> bool:
        return not self.ivs

    @property
    def min(self) -> int:
        return self.ivs[0][0]

    @property
    def max(self) -> int:
        return self.ivs[-1][1]

    @property
    def assigned(self) -> bool:
        return len(self.ivs) == 1 and self.ivs[0][0] == self.ivs[0][1]

    @property
    def value(self) -> int:
        if not self.assigned:
            raise ValueError("domain not assigned")
        return self.ivs[0][0]

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ivs)

    def __contains__(self, v: int) -> bool:
        for lo, hi in self.ivs:
            if lo <= v <= hi:
                return True
            if v < lo:
                return False
        return False

    def values(self):
        for lo, hi in self.ivs:
            yield from range(lo, hi + 1)

    def clamp(self, lo: int, hi: int) -> "IntDomain":
        """Intersect with the interval [lo, hi]."""
        if lo <= self.min and hi >= self.max:
            return self
        out = []
        for a, b in self.ivs:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return IntDomain(tuple(out))

    def remove(self, v: int) -> "IntDomain":
        if v not in self:
            return self
        out = []
        for a, b in self.ivs:
            if a <= v <= b:
                if a <= v - 1:
                    out.append((a, v - 1))
                if v + 1 <= b:
                    out.append((v + 1, b))
            else:
                out.append((a, b))
        return IntDomain(tuple(out))

    def intersect(self, other: "IntDomain") -> "IntDomain":
        out = []
        i = j = 0
        a, b = self.ivs, other.ivs
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntDomain(tuple(out))

    def __eq__(self, other) -> bool:
        return isinstance(other, IntDomain) and self.ivs == other.ivs

    def __hash__(self) -> int:
        return hash(self.ivs)

    def __repr__(self) -> str:
        parts = [f"{lo}" if lo == hi else f"{lo}..{hi}" for lo, hi in self.ivs]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class SetDomain:
    """Bounds for a finite-set variable: glb <= S <= lub."""

    glb: frozenset[int]
    lub: frozenset[int]

    @staticmethod
    def make(glb, lub) -> "SetDomain":
        g, l = frozenset(glb), frozenset(lub)
        if not g <= l:
            raise DomainError(f"set glb {sorted(g)} not a subset of lub {sorted(l)}")
        return SetDomain(g, l)

    @property
    def assigned(self) -> bool:
        return self.glb == self.lub

    def include(self, v: int) -> "SetDomain | None":
        """Add v to the glb; None signals failure (v outside the lub)."""
        if v in self.glb:
            return self
        if v not in self.lub:
            return None
        return SetDomain(self.glb | {v}, self.lub)

    def exclude(self, v: int) -> "SetDomain | None":
        """Remove v from the lub; None signals failure (v in the glb)."""
        if v not in self.lub:
            return self
        if v in self.glb:
            return None
        return SetDomain(self.glb, self.lub - {v})

    def restrict(self, glb_add: frozenset[int], lub_keep: frozenset[int]) -> "SetDomain | None":
        """Grow the glb by glb_add and shrink the lub to lub_keep; None on failure."""
        g = self.glb | glb_add
        l = self.lub & lub_keep
        if not g <= l:
            return None
        if g == self.glb and l == self.lub:
            return self
        return SetDomain(g, l)

    def __repr__(self) -> str:
        return f"[{sorted(self.glb)}..{sorted(self.lub)}]"
