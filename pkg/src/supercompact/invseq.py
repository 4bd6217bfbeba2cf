"""Finite inverse sequences of stage spaces with tagged bonding maps.

``maps[i]`` goes from ``stages[i + 1]`` down to ``stages[i]``. Each map is
tagged ``FiniteKernel`` (a finite-kernel epimorphism, topologically a local
homeomorphism) or ``ProductBySimple`` (the projection off a new factor).
The limit of a finite sequence is its top stage.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from . import spaces as sp
from .circle import PowerMap, Turn, arc_preimage
from .groups import FiniteGroup, GroupHom, cyclic, kernel, quotient
from .spaces import CIRCLE, POINT, Circle, Discrete, Product, Space


class Tag(enum.Enum):
    FINITE_KERNEL = "FiniteKernel"
    PRODUCT_BY_SIMPLE = "ProductBySimple"

    def __str__(self):
        return self.value


class NotSurjective(ValueError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"bonding map {index} is not surjective")


class BadIndices(ValueError):
    pass


class InvalidSequence(ValueError):
    pass


# -- realizations -------------------------------------------------------------


@dataclass(frozen=True)
class FiniteHom:
    hom: GroupHom

    def __str__(self):
        return f"hom {self.hom.domain.order}->{self.hom.codomain.order}"


@dataclass(frozen=True)
class CirclePower:
    n: int

    def __str__(self):
        return f"pow {self.n}"


@dataclass(frozen=True)
class DropFactor:
    index: int

    def __str__(self):
        return f"drop {self.index}"


@dataclass(frozen=True)
class Factorwise:
    """A product of finite-kernel maps, one per factor of a product space."""

    parts: tuple

    def __str__(self):
        return "factors " + " ; ".join(str(p) for p in self.parts)


@dataclass(frozen=True)
class Compose:
    """Apply ``maps`` in order; the empty composite is the identity."""

    maps: tuple

    def __str__(self):
        if not self.maps:
            return "identity"
        return "compose(" + ", ".join(str(m.realization) for m in self.maps) + ")"


Realization = Union[FiniteHom, CirclePower, DropFactor, Factorwise, Compose]


def _part_space(part) -> tuple[Space, Space]:
    if isinstance(part, CirclePower):
        return CIRCLE, CIRCLE
    if isinstance(part, FiniteHom):
        return Discrete.of_group(part.hom.domain), Discrete.of_group(part.hom.codomain)
    raise InvalidSequence(f"{part} cannot act on a single factor")


@dataclass(frozen=True)
class BondingMap:
    source: Space
    target: Space
    realization: Realization

    def __post_init__(self):
        self._check()

    def _check(self):
        r, s, t = self.realization, self.source, self.target
        if isinstance(r, CirclePower):
            if not (isinstance(s, Circle) and isinstance(t, Circle)) or r.n < 1:
                raise InvalidSequence("power maps act circle -> circle")
        elif isinstance(r, FiniteHom):
            if s != Discrete.of_group(r.hom.domain) or t != Discrete.of_group(r.hom.codomain):
                raise InvalidSequence("finite homomorphism does not match its stages")
        elif isinstance(r, DropFactor):
            if sp.is_point(t):
                if isinstance(s, Product) and len(s.factors) > 1:
                    raise InvalidSequence("dropping onto the point needs a single factor")
            else:
                if not isinstance(s, Product) or r.index != len(s.factors) - 1:
                    raise InvalidSequence("drop must remove the last factor of a product")
                rest = s.factors[:-1]
                expect = rest[0] if len(rest) == 1 else Product(rest)
                if expect != t:
                    raise InvalidSequence("drop target does not match")
        elif isinstance(r, Factorwise):
            if not (isinstance(s, Product) and isinstance(t, Product)):
                raise InvalidSequence("factorwise maps act between products")
            if not len(s.factors) == len(t.factors) == len(r.parts):
                raise InvalidSequence("factor counts differ")
            for p, fs, ft in zip(r.parts, s.factors, t.factors):
                if _part_space(p) != (fs, ft):
                    raise InvalidSequence(f"{p} does not match factor {fs} -> {ft}")
        elif isinstance(r, Compose):
            cur = s
            for m in r.maps:
                if m.source != cur:
                    raise InvalidSequence("composite does not chain")
                cur = m.target
            if cur != t:
                raise InvalidSequence("composite ends at the wrong space")

    def __str__(self):
        return str(self.realization)

    # evaluation

    def __call__(self, x):
        return _apply(self.realization, self.source, self.target, x)

    def preimage(self, body):
        return _preimage(self.realization, self.source, self.target, body)

    def kernel_order(self) -> int | None:
        """Number of points over the identity, or None when infinite."""
        return _kernel_order(self.realization, self.source)

    def is_local_homeomorphism(self) -> bool:
        return _kernel_order(self.realization, self.source) is not None and not isinstance(
            self.realization, (DropFactor, Compose)
        )

    def is_surjective(self) -> bool:
        r = self.realization
        if isinstance(r, FiniteHom):
            return r.hom.is_surjective()
        if isinstance(r, (CirclePower, DropFactor)):
            return True
        if isinstance(r, Factorwise):
            return all(not isinstance(p, FiniteHom) or p.hom.is_surjective() for p in r.parts)
        return all(m.is_surjective() for m in r.maps)

    def simplified(self) -> BondingMap:
        """Fold adjacent power maps and homomorphisms of a composite."""
        r = self.realization
        if not isinstance(r, Compose):
            return self
        if sp.is_point(self.target) and not sp.is_point(self.source):
            return self
        out: list[BondingMap] = []
        for m in r.maps:
            m = m.simplified()
            if isinstance(m.realization, Compose):
                out.extend(m.realization.maps)
                continue
            if out:
                prev = out[-1]
                if isinstance(prev.realization, CirclePower) and isinstance(m.realization, CirclePower):
                    out[-1] = BondingMap(CIRCLE, CIRCLE, CirclePower(prev.realization.n * m.realization.n))
                    continue
                if isinstance(prev.realization, FiniteHom) and isinstance(m.realization, FiniteHom):
                    out[-1] = finite_map(m.realization.hom.compose(prev.realization.hom))
                    continue
            out.append(m)
        if len(out) == 1:
            return out[0]
        return BondingMap(self.source, self.target, Compose(tuple(out)))


def part_map(part) -> BondingMap:
    """One factor of a Factorwise realization as a map in its own right."""
    return BondingMap(*_part_space(part), part)


def finite_map(hom: GroupHom) -> BondingMap:
    return BondingMap(Discrete.of_group(hom.domain), Discrete.of_group(hom.codomain), FiniteHom(hom))


def power(n: int) -> BondingMap:
    return BondingMap(CIRCLE, CIRCLE, CirclePower(n))


def drop(base: Space, factor: Space) -> BondingMap:
    source = sp.extend_space(base, factor)
    index = len(source.factors) - 1 if isinstance(source, Product) else 0
    return BondingMap(source, base, DropFactor(index))


def identity(space: Space) -> BondingMap:
    return BondingMap(space, space, Compose(()))


def _apply(r, s, t, x):
    if isinstance(r, FiniteHom):
        return r.hom(x)
    if isinstance(r, CirclePower):
        return x * r.n
    if isinstance(r, DropFactor):
        if sp.is_point(t):
            return 0
        rest = x[:-1]
        return rest[0] if len(rest) == 1 else rest
    if isinstance(r, Factorwise):
        return tuple(_apply(p, *_part_space(p), xi) for p, xi in zip(r.parts, x))
    for m in r.maps:
        x = m(x)
    return x


def _preimage(r, s, t, body):
    if isinstance(r, FiniteHom):
        return frozenset(x for x in range(r.hom.domain.order) if r.hom(x) in body)
    if isinstance(r, CirclePower):
        return arc_preimage(PowerMap(r.n), body)
    if isinstance(r, DropFactor):
        if sp.is_point(t):
            return sp.full_set(s)
        full = sp.full_set(s.factors[-1])
        return (body + (full,)) if isinstance(t, Product) else (body, full)
    if isinstance(r, Factorwise):
        return tuple(_preimage(p, *_part_space(p), b) for p, b in zip(r.parts, body))
    for m in reversed(r.maps):
        body = m.preimage(body)
    return body


def _kernel_order(r, s) -> int | None:
    if isinstance(r, FiniteHom):
        return kernel(r.hom).order
    if isinstance(r, CirclePower):
        return r.n
    if isinstance(r, DropFactor):
        dropped = s.factors[-1] if isinstance(s, Product) else s
        return dropped.size if isinstance(dropped, Discrete) else None
    if isinstance(r, Factorwise):
        return math.prod(_kernel_order(p, _part_space(p)[0]) for p in r.parts)
    out = 1
    for m in r.maps:
        k = m.kernel_order()
        if k is None:
            return None
        out *= k
    return out


def circle_kernel(m: BondingMap) -> list[Turn]:
    """Kernel elements of a circle-to-circle composite of power maps."""
    m = m.simplified()
    if isinstance(m.realization, Compose) and not m.realization.maps:
        return [Turn(0)]
    if not isinstance(m.realization, CirclePower):
        raise ValueError("not a power map")
    n = m.realization.n
    return [Turn(Fraction(j, n)) for j in range(n)]


# -- sequences ----------------------------------------------------------------


@dataclass(frozen=True)
class InverseSeq:
    stages: tuple
    maps: tuple
    tags: tuple = field(default=())
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.tags:
            object.__setattr__(self, "tags", tuple(default_tag(m) for m in self.maps))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "labels", tuple(self.labels) or tuple(str(s) for s in self.stages))
        self.validate()

    @property
    def top(self) -> Space:
        return self.stages[-1]

    def __len__(self):
        return len(self.stages)

    def validate(self) -> None:
        if not self.stages:
            raise InvalidSequence("a sequence needs a base stage")
        if len(self.maps) != len(self.stages) - 1 or len(self.tags) != len(self.maps):
            raise InvalidSequence("need one map and one tag between consecutive stages")
        for i, (m, tag) in enumerate(zip(self.maps, self.tags)):
            if m.source != self.stages[i + 1] or m.target != self.stages[i]:
                raise InvalidSequence(f"map {i} does not go from stage {i + 1} to stage {i}")
            if not m.is_surjective():
                raise NotSurjective(i)
            if tag != default_tag(m):
                raise InvalidSequence(f"tag {tag} inconsistent with {m}")


def default_tag(m: BondingMap) -> Tag:
    r = m.realization
    if isinstance(r, DropFactor):
        return Tag.PRODUCT_BY_SIMPLE
    if isinstance(r, (FiniteHom, CirclePower, Factorwise)):
        return Tag.FINITE_KERNEL
    raise InvalidSequence("composites are not successor maps")


def solenoid_sequence(n: int, depth: int) -> InverseSeq:
    """Circles joined by x -> n x; its limit is the n-adic solenoid."""
    if n < 2 or depth < 1:
        raise ValueError("need n >= 2 and depth >= 1")
    return InverseSeq(
        stages=(CIRCLE,) * (depth + 1),
        maps=tuple(power(n) for _ in range(depth)),
        labels=tuple(f"T (stage {i})" for i in range(depth + 1)),
    )


def profinite_sequence(tower: Sequence[GroupHom], base: FiniteGroup | None = None) -> InverseSeq:
    """Discrete stages joined by surjective homomorphisms.

    ``tower[i]`` maps stage i+1 onto stage i, so consecutive homomorphisms
    chain through ``tower[i].domain == tower[i + 1].codomain``.
    """
    if not tower:
        G = base or cyclic(1)
        return InverseSeq((Discrete.of_group(G),), (), labels=(G.name or str(G.order),))
    for i, f in enumerate(tower):
        if not f.is_surjective():
            raise NotSurjective(i)
        if i + 1 < len(tower) and tower[i + 1].codomain != f.domain:
            raise InvalidSequence(f"homomorphisms {i} and {i + 1} do not chain")
    groups = [tower[0].codomain] + [f.domain for f in tower]
    return InverseSeq(
        stages=tuple(Discrete.of_group(G) for G in groups),
        maps=tuple(finite_map(f) for f in tower),
        labels=tuple(G.name or f"order {G.order}" for G in groups),
    )


def reduction_tower(orders: Sequence[int]) -> list[GroupHom]:
    """Reductions Z_{orders[i+1]} -> Z_{orders[i]}."""
    out = []
    for a, b in zip(orders, orders[1:]):
        if b % a:
            raise ValueError(f"{a} does not divide {b}")
        out.append(GroupHom(cyclic(b), cyclic(a), tuple(x % a for x in range(b))))
    return out


def quotient_tower(G: FiniteGroup, chain) -> list[GroupHom]:
    """Canonical epimorphisms G/H_{i+1} -> G/H_i for a decreasing normal chain."""
    quots = [quotient(G, H) for H in chain]
    out = []
    for (Qi, qi), (Qj, qj) in zip(quots, quots[1:]):
        m = [-1] * Qj.order
        for x in range(G.order):
            m[qj(x)] = qi(x)
        out.append(GroupHom(Qj, Qi, tuple(m)))
    return out


def composite_projection(S: InverseSeq, frm: int, to: int) -> BondingMap:
    """The map stage ``frm`` -> stage ``to`` obtained by composing bonding maps."""
    if not (0 <= to <= frm < len(S.stages)):
        raise BadIndices(f"need 0 <= to <= from < {len(S.stages)}, got from={frm}, to={to}")
    if to == frm:
        return identity(S.stages[frm])
    maps = tuple(S.maps[i] for i in range(frm - 1, to - 1, -1))
    return BondingMap(S.stages[frm], S.stages[to], Compose(maps))


def sequence_kernel_orders(S: InverseSeq) -> list[int | None]:
    return [m.kernel_order() for m in S.maps]


__all__ = [
    "Tag", "FiniteHom", "CirclePower", "DropFactor", "Factorwise", "Compose", "BondingMap",
    "InverseSeq", "NotSurjective", "BadIndices", "InvalidSequence", "solenoid_sequence",
    "profinite_sequence", "composite_projection", "reduction_tower", "quotient_tower",
    "finite_map", "part_map", "power", "drop", "identity", "circle_kernel", "POINT",
]
