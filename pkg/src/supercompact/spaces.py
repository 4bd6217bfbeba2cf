"""Stage spaces and the closed sets that live on them.

Three kinds of space: a finite discrete set (optionally carrying a group
law), the circle, and finite products of these. Closed sets are plain
hashable values:

* over ``Discrete``: a ``frozenset`` of point indices,
* over ``Circle``: an :class:`~supercompact.circle.ArcSet`,
* over ``Product``: a tuple with one such body per factor (a box).

The empty set is never a member of a family, so ``intersect`` returns
``None`` for an empty result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

from .circle import FULL, Arc, ArcSet, Turn, arc_union, grid, local_sides
from .groups import FiniteGroup, cyclic


class SpaceMismatch(ValueError):
    pass


class NoGroupStructure(ValueError):
    pass


@dataclass(frozen=True)
class Discrete:
    size: int
    group: FiniteGroup | None = None

    @classmethod
    def of_group(cls, G: FiniteGroup) -> Discrete:
        return cls(G.order, G)

    def __str__(self):
        if self.group is not None:
            return f"discrete {self.group.name or 'group'} (order {self.size})"
        return f"discrete {self.size}"


@dataclass(frozen=True)
class Circle:
    def __str__(self):
        return "circle"


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a product needs at least one factor")

    def __str__(self):
        return "product(" + ", ".join(str(f) for f in self.factors) + ")"


Space = Union[Discrete, Circle, Product]
Body = Any

POINT = Discrete.of_group(cyclic(1))
CIRCLE = Circle()


def is_point(space: Space) -> bool:
    return isinstance(space, Discrete) and space.size == 1


def extend_space(base: Space, factor: Space) -> Space:
    """base x factor, with the one-point space absorbed."""
    if is_point(base):
        return factor
    if isinstance(base, Product):
        return Product(base.factors + (factor,))
    return Product((base, factor))


def has_group(space: Space) -> bool:
    if isinstance(space, Circle):
        return True
    if isinstance(space, Discrete):
        return space.group is not None
    return all(has_group(f) for f in space.factors)


# -- points -------------------------------------------------------------------


def grid_points(space: Space, q: int) -> list:
    """Resolution-q sample points: all points of a discrete space, (1/q)Z on the circle."""
    if isinstance(space, Discrete):
        return list(range(space.size))
    if isinstance(space, Circle):
        return grid(q)
    return list(itertools.product(*(grid_points(f, q) for f in space.factors)))


def identity_point(space: Space):
    if isinstance(space, Discrete):
        return 0
    if isinstance(space, Circle):
        return Turn(0)
    return tuple(identity_point(f) for f in space.factors)


def translate_point(space: Space, g, x):
    if isinstance(space, Circle):
        return g + x
    if isinstance(space, Discrete):
        if space.group is None:
            raise NoGroupStructure(str(space))
        return space.group.mul(g, x)
    return tuple(translate_point(f, gi, xi) for f, gi, xi in zip(space.factors, g, x))


# -- closed sets --------------------------------------------------------------


def full_set(space: Space) -> Body:
    if isinstance(space, Discrete):
        return frozenset(range(space.size))
    if isinstance(space, Circle):
        return FULL
    return tuple(full_set(f) for f in space.factors)


def is_full(space: Space, body: Body) -> bool:
    return body == full_set(space)


def intersect(space: Space, a: Body, b: Body) -> Body | None:
    if isinstance(space, Discrete):
        return (a & b) or None
    if isinstance(space, Circle):
        return (a & b) or None
    parts = []
    for f, x, y in zip(space.factors, a, b):
        z = intersect(f, x, y)
        if z is None:
            return None
        parts.append(z)
    return tuple(parts)


def meets(space: Space, a: Body, b: Body) -> bool:
    if isinstance(space, Discrete):
        return not a.isdisjoint(b)
    if isinstance(space, Circle):
        return a.intersects(b)
    return all(meets(f, x, y) for f, x, y in zip(space.factors, a, b))


def intersect_all(space: Space, bodies: Iterable[Body]) -> Body | None:
    out = full_set(space)
    for b in bodies:
        out = intersect(space, out, b)
        if out is None:
            return None
    return out


def subset(space: Space, a: Body, b: Body) -> bool:
    if isinstance(space, Discrete):
        return a <= b
    if isinstance(space, Circle):
        return a.issubset(b)
    return all(subset(f, x, y) for f, x, y in zip(space.factors, a, b))


def contains(space: Space, body: Body, x) -> bool:
    if isinstance(space, (Discrete, Circle)):
        return x in body
    return all(contains(f, b, xi) for f, b, xi in zip(space.factors, body, x))


def union(space: Space, bodies: Iterable[Body]) -> Body:
    """Union of closed sets on a discrete space or the circle."""
    if isinstance(space, Discrete):
        return frozenset().union(*bodies)
    if isinstance(space, Circle):
        return arc_union(bodies)
    raise TypeError("unions of boxes are not boxes")


def translate(space: Space, g, body: Body) -> Body:
    if isinstance(space, Circle):
        return body.translate(g)
    if isinstance(space, Discrete):
        if space.group is None:
            raise NoGroupStructure(str(space))
        return frozenset(space.group.mul(g, x) for x in body)
    return tuple(translate(f, gi, b) for f, gi, b in zip(space.factors, g, body))


def local_cells(space: Space, body: Body, x) -> frozenset:
    """The germs at x covered by a closed set.

    The neighbourhood of x splits into finitely many cells (left/point/right
    on each circle factor, just the point on discrete ones); a closed set
    with rational endpoints either contains a cell near x or misses it.
    """
    if isinstance(space, Discrete):
        return frozenset("P") if x in body else frozenset()
    if isinstance(space, Circle):
        return local_sides(body, x)
    per = [local_cells(f, b, xi) for f, b, xi in zip(space.factors, body, x)]
    return frozenset(itertools.product(*per))


def all_cells(space: Space) -> frozenset:
    if isinstance(space, Discrete):
        return frozenset("P")
    if isinstance(space, Circle):
        return frozenset("LPR")
    return frozenset(itertools.product(*(all_cells(f) for f in space.factors)))


def sort_key(space: Space, body: Body):
    if isinstance(space, Discrete):
        return (len(body), tuple(sorted(body)))
    if isinstance(space, Circle):
        return (not body.is_full, body.components)
    return tuple(sort_key(f, b) for f, b in zip(space.factors, body))


def check_body(space: Space, body: Body) -> None:
    """Raise SpaceMismatch if ``body`` is not a closed set over ``space``."""
    if isinstance(space, Discrete):
        if not isinstance(body, frozenset) or not all(0 <= x < space.size for x in body):
            raise SpaceMismatch(f"{body!r} is not a point set of {space}")
    elif isinstance(space, Circle):
        if not isinstance(body, ArcSet):
            raise SpaceMismatch(f"{body!r} is not an arc set")
    else:
        if not isinstance(body, tuple) or len(body) != len(space.factors):
            raise SpaceMismatch(f"{body!r} is not a box over {space}")
        for f, b in zip(space.factors, body):
            check_body(f, b)


def format_body(space: Space, body: Body) -> str:
    if isinstance(space, Discrete):
        return "set " + ",".join(str(x) for x in sorted(body))
    if isinstance(space, Circle):
        return str(body)
    return "box [ " + " ; ".join(format_body(f, b) for f, b in zip(space.factors, body)) + " ]"


# -- atom arrangements ----------------------------------------------------------


class Arrangement:
    """Exact bitmask encoding of finitely many closed sets.

    The space is cut into atoms on which every encoded set is constant: the
    points of a discrete space, and on the circle the arc endpoints together
    with the open gaps between consecutive endpoints. Intersection and
    containment of encoded sets become ``&`` and mask comparison.
    """

    def __init__(self, space: Space, bodies: Iterable[Body]):
        self.space = space
        bodies = list(bodies)
        if isinstance(space, Discrete):
            self.size = space.size
        elif isinstance(space, Circle):
            ends = {Fraction(0)}
            for b in bodies:
                ends |= b.endpoints()
            self.ends = sorted(ends)
            self.den = math.lcm(*(e.denominator for e in self.ends))
            self.pos = [int(e * self.den) for e in self.ends]
            self.size = 2 * len(self.ends)
        else:
            self.parts = [Arrangement(f, [b[i] for b in bodies]) for i, f in enumerate(space.factors)]
            self.size = math.prod(p.size for p in self.parts)
        self.all = (1 << self.size) - 1

    def encode(self, body: Body) -> int:
        space = self.space
        if isinstance(space, Discrete):
            return sum(1 << x for x in body)
        if isinstance(space, Circle):
            return self._encode_arcs(body)
        masks = [p.encode(b) for p, b in zip(self.parts, body)]
        sizes = [p.size for p in self.parts]
        out = masks[-1]
        width = sizes[-1]
        for m, size in zip(reversed(masks[:-1]), reversed(sizes[:-1])):
            acc = 0
            for i in _bits(m):
                acc |= out << (i * width)
            out = acc
            width *= size
        return out

    def _encode_arcs(self, body: ArcSet) -> int:
        if body.is_full:
            return self.all
        den, pos = self.den, self.pos
        mask = 0
        for a in body.components:
            s = a.start.value * den
            ln = a.length * den
            if s.denominator != 1 or ln.denominator != 1:
                raise ValueError("arc endpoint not in the arrangement")
            s, ln = int(s), int(ln)
            for i, p in enumerate(pos):
                off = (p - s) % den
                if off <= ln:
                    mask |= 1 << (2 * i)
                    if off < ln:
                        mask |= 1 << (2 * i + 1)
        return mask

    def decode(self, mask: int) -> Body:
        space = self.space
        if isinstance(space, Discrete):
            return frozenset(_bits(mask))
        if isinstance(space, Circle):
            if mask == self.all:
                return FULL
            ends = self.ends
            m = len(ends)
            arcs = []
            for i in range(m):
                if mask >> (2 * i) & 1:
                    arcs.append(Arc.point(ends[i]))
                if mask >> (2 * i + 1) & 1:
                    nxt = ends[i + 1] if i + 1 < m else ends[0] + 1
                    arcs.append(Arc(ends[i], nxt - ends[i]))
            return ArcSet(arcs)
        raise TypeError("boxes are decoded factorwise")


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits(mask: int) -> list[int]:
    return list(_bits(mask))


def member_masks(space: Space, bodies: Sequence[Body], extra: Iterable[Body] = ()) -> tuple[Arrangement, list[int]]:
    extra = list(extra)
    arr = Arrangement(space, list(bodies) + extra)
    return arr, [arr.encode(b) for b in bodies]
