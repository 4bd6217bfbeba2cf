"""Exact arithmetic on the circle group R/Z.

Angles are measured in turns, so the circle is [0, 1) with addition mod 1.
The multiplicative picture translates as z*w <-> x+y, z^2 <-> 2x and
2*pi/3 radians <-> 1/3 turn.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Union

Rational = Union[int, Fraction, str]


def frac(x: Rational) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class Turn:
    value: Fraction

    def __init__(self, value: Rational = 0):
        object.__setattr__(self, "value", frac(value) % 1)

    def __add__(self, other: Turn) -> Turn:
        return Turn(self.value + other.value)

    def __sub__(self, other: Turn) -> Turn:
        return Turn(self.value - other.value)

    def __neg__(self) -> Turn:
        return Turn(-self.value)

    def __mul__(self, n: int) -> Turn:
        return Turn(self.value * n)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Turn({self.value})"

    def __str__(self):
        return str(self.value)


ZERO = Turn(0)


def grid(q: int) -> list[Turn]:
    return [Turn(Fraction(k, q)) for k in range(q)]


@dataclass(frozen=True, order=True)
class Arc:
    """Closed arc [start, start + length] mod 1; length 1 means the full circle."""

    start: Turn
    length: Fraction

    def __init__(self, start: Rational | Turn, length: Rational):
        length = frac(length)
        if length < 0:
            raise ValueError("arc length must be non-negative")
        if length >= 1:
            start, length = Turn(0), Fraction(1)
        object.__setattr__(self, "start", start if isinstance(start, Turn) else Turn(start))
        object.__setattr__(self, "length", length)

    @classmethod
    def full(cls) -> Arc:
        return cls(0, 1)

    @classmethod
    def point(cls, x: Rational | Turn) -> Arc:
        return cls(x, 0)

    @classmethod
    def between(cls, a: Rational | Turn, b: Rational | Turn) -> Arc:
        """The arc running counterclockwise from a to b."""
        a = a if isinstance(a, Turn) else Turn(a)
        b = b if isinstance(b, Turn) else Turn(b)
        return cls(a, (b - a).value)

    @property
    def is_full(self) -> bool:
        return self.length == 1

    @property
    def end(self) -> Turn:
        return Turn(self.start.value + self.length)

    def __contains__(self, x: Turn) -> bool:
        return self.is_full or (x - self.start).value <= self.length

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """The arc as closed intervals inside [0, 1]."""
        if self.is_full:
            return [(Fraction(0), Fraction(1))]
        s = self.start.value
        e = s + self.length
        if e == 1:
            return [(s, e), (Fraction(0), Fraction(0))]
        if e < 1:
            return [(s, e)]
        return [(s, Fraction(1)), (Fraction(0), e - 1)]

    def __repr__(self):
        if self.is_full:
            return "Arc.full()"
        return f"Arc({self.start.value}, {self.length})"

    def __str__(self):
        if self.is_full:
            return "full"
        return f"arc {self.start.value} {self.length}"


def arc_within(inner: Arc, outer: Arc) -> bool:
    """Closed containment of arcs."""
    if outer.is_full:
        return True
    if inner.is_full:
        return False
    d = (inner.start - outer.start).value
    return d + inner.length <= outer.length


class ArcSet:
    """A closed subset of the circle made of finitely many disjoint arcs.

    Components are merged whenever they touch, so equal point sets have
    equal component lists.
    """

    __slots__ = ("components", "_hash")

    def __init__(self, arcs: Iterable[Arc] = ()):
        self.components: tuple[Arc, ...] = _canonical(list(arcs))
        self._hash = hash(self.components)

    @classmethod
    def full(cls) -> ArcSet:
        return FULL

    @classmethod
    def of(cls, *arcs: Arc) -> ArcSet:
        return cls(arcs)

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Fraction, Fraction]]) -> ArcSet:
        return cls(Arc(a, b - a) for a, b in pieces)

    def __eq__(self, other):
        return isinstance(other, ArcSet) and self.components == other.components

    def __hash__(self):
        return self._hash

    def __lt__(self, other: ArcSet):
        return self.components < other.components

    def __bool__(self):
        return bool(self.components)

    def __iter__(self) -> Iterator[Arc]:
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    @property
    def is_full(self) -> bool:
        return len(self.components) == 1 and self.components[0].is_full

    @property
    def is_empty(self) -> bool:
        return not self.components

    def __contains__(self, x: Turn) -> bool:
        return any(x in a for a in self.components)

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        return sorted(p for a in self.components for p in a.pieces())

    def endpoints(self) -> set[Fraction]:
        out = set()
        for a in self.components:
            if not a.is_full:
                out.add(a.start.value)
                out.add(a.end.value)
        return out

    def __and__(self, other: ArcSet) -> ArcSet:
        return arc_intersect(self, other)

    def __or__(self, other: ArcSet) -> ArcSet:
        return ArcSet(self.components + other.components)

    def issubset(self, other: ArcSet) -> bool:
        return (self & other) == self

    def __le__(self, other: ArcSet) -> bool:
        return self.issubset(other)

    def intersects(self, other: ArcSet) -> bool:
        for a, b in self.pieces():
            for c, d in other.pieces():
                if a <= d and c <= b:
                    return True
        return False

    def translate(self, g: Turn) -> ArcSet:
        return ArcSet(Arc(a.start + g, a.length) for a in self.components)

    def measure(self) -> Fraction:
        return sum((a.length for a in self.components), Fraction(0))

    def __repr__(self):
        if self.is_full:
            return "ArcSet.full()"
        return "ArcSet(" + ", ".join(repr(a) for a in self.components) + ")"

    def __str__(self):
        if not self.components:
            return "empty"
        return " + ".join(str(a) for a in self.components)


def _canonical(arcs: list[Arc]) -> tuple[Arc, ...]:
    if not arcs:
        return ()
    if any(a.is_full for a in arcs):
        return (Arc.full(),)
    pieces = sorted(p for a in arcs for p in a.pieces())
    merged: list[list[Fraction]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if len(merged) == 1 and merged[0] == [0, 1]:
        return (Arc.full(),)
    if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == 1:
        first = merged.pop(0)
        merged[-1][1] = 1 + first[1]
    return tuple(sorted(Arc(a, b - a) for a, b in merged))


FULL = ArcSet([Arc.full()])
EMPTY = ArcSet()


def arc_intersect(a: ArcSet, b: ArcSet) -> ArcSet:
    if a.is_full:
        return b
    if b.is_full:
        return a
    out = []
    for s1, e1 in a.pieces():
        for s2, e2 in b.pieces():
            lo, hi = max(s1, s2), min(e1, e2)
            if lo <= hi:
                out.append(Arc(lo, hi - lo))
    return ArcSet(out)


def arc_union(sets: Iterable[ArcSet]) -> ArcSet:
    return ArcSet(a for s in sets for a in s.components)


def local_sides(S: ArcSet, x: Turn) -> frozenset[str]:
    """Which germs of the circle at x lie in S: 'L' (just before), 'P' (x), 'R' (just after)."""
    if S.is_full:
        return frozenset("LPR")
    out = set()
    for a in S.components:
        if x not in a:
            continue
        out.add("P")
        d = (x - a.start).value
        if d > 0:
            out.add("L")
        if d < a.length:
            out.add("R")
    return frozenset(out)


def in_interior(S: ArcSet, x: Turn) -> bool:
    return local_sides(S, x) == frozenset("LPR")


# -- power maps ---------------------------------------------------------------


@dataclass(frozen=True)
class PowerMap:
    """The endomorphism x -> n x of the circle; kernel {k/n}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("power map exponent must be positive")

    def __call__(self, x: Turn) -> Turn:
        return x * self.n

    @cached_property
    def kernel(self) -> tuple[Turn, ...]:
        return tuple(Turn(Fraction(k, self.n)) for k in range(self.n))

    def image_arc(self, a: Arc) -> Arc:
        if a.is_full or a.length * self.n >= 1:
            return Arc.full()
        return Arc(a.start * self.n, a.length * self.n)

    def image(self, S: ArcSet) -> ArcSet:
        return ArcSet(self.image_arc(a) for a in S.components)

    def compose(self, other: PowerMap) -> PowerMap:
        return PowerMap(self.n * other.n)


def power_map(n: int) -> PowerMap:
    return PowerMap(n)


def branch_preimages(f: PowerMap, a: Arc) -> list[Arc]:
    """The n arcs of length a.length/n that f maps bijectively onto a."""
    if a.is_full:
        raise ValueError("the full circle has no injective branches")
    n = f.n
    return [Arc(Fraction(a.start.value + k, n), a.length / n) for k in range(n)]


def arc_preimage(f: PowerMap, S: ArcSet) -> ArcSet:
    if S.is_full:
        return FULL
    return ArcSet(b for a in S.components for b in branch_preimages(f, a))
