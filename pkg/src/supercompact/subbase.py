"""Finite families of closed sets: linkedness, the binary property, the
neighbourhood criterion at a rational resolution, star refinements of arc
covers, restriction to a cover, and translation invariance.

Families over a product may be stored as *blocks*: a block is a tuple of
factor families and stands for every box with one body from each factor.
This keeps products of large factor families small.
"""

from __future__ import annotations

import bisect
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import spaces as sp
from .circle import FULL, Arc, ArcSet, Turn
from .spaces import Circle, Discrete, Product, Space


class NotIntersectionClosed(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"binary search exceeded {nodes} nodes")


class NotACover(ValueError):
    def __init__(self, point):
        self.point = point
        super().__init__(f"point {point} is not inside any cover member")


class StarRefinementFailed(RuntimeError):
    pass


# -- families -----------------------------------------------------------------


class SubbaseFamily:
    """A finite family of nonempty closed sets over one space."""

    def __init__(self, space: Space, members: Iterable = (), closed: bool = False, blocks=None):
        self.space = space
        self.closed = closed
        if blocks is not None:
            if not isinstance(space, Product):
                raise sp.SpaceMismatch("blocks only make sense over a product")
            self.blocks = tuple(tuple(_dedupe(f, part) for f, part in zip(space.factors, b)) for b in blocks)
            self.blocks = tuple(b for b in self.blocks if all(b))
            self._members = None
        else:
            self.blocks = None
            self._members = _dedupe(space, members)

    @classmethod
    def of(cls, space: Space, *members, closed: bool = False) -> SubbaseFamily:
        return cls(space, members, closed)

    @property
    def members(self) -> tuple:
        if self._members is None:
            seen = {}
            for b in self.blocks:
                for box in itertools.product(*b):
                    seen.setdefault(box, None)
            self._members = tuple(seen)
        return self._members

    @cached_property
    def memberset(self) -> frozenset:
        return frozenset(self.members)

    @cached_property
    def _block_sets(self):
        return [tuple(frozenset(p) for p in b) for b in self.blocks]

    def __contains__(self, body) -> bool:
        if self.blocks is not None:
            return any(all(x in p for x, p in zip(body, b)) for b in self._block_sets)
        return body in self.memberset

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def projection(self, i: int) -> tuple:
        """Bodies appearing in factor i (blocked families only)."""
        seen = {}
        for b in self.blocks:
            for x in b[i]:
                seen.setdefault(x, None)
        return tuple(seen)

    def with_flag(self, closed: bool) -> SubbaseFamily:
        if self.blocks is not None:
            return SubbaseFamily(self.space, closed=closed, blocks=self.blocks)
        return SubbaseFamily(self.space, self.members, closed)

    def __repr__(self):
        kind = f"{len(self.blocks)} blocks" if self.blocks is not None else f"{len(self.members)} members"
        return f"SubbaseFamily({self.space}, {kind}, closed={self.closed})"


def _dedupe(space: Space, members: Iterable) -> tuple:
    out = {}
    for m in members:
        sp.check_body(space, m)
        if _is_empty(space, m):
            raise ValueError("families never contain the empty set")
        out.setdefault(m, None)
    return tuple(out)


def _is_empty(space: Space, body) -> bool:
    if isinstance(space, Product):
        return any(_is_empty(f, b) for f, b in zip(space.factors, body))
    return not body


def family_contains_all(F: SubbaseFamily, bodies_or_block, blocked: bool = False) -> bool:
    """Whether every listed body (or every box of one block) lies in F."""
    if blocked:
        block = bodies_or_block
        if F.blocks is not None:
            for b in F._block_sets:
                if all(all(x in p for x in part) for part, p in zip(block, b)):
                    return True
        return all(box in F for box in itertools.product(*block))
    return all(x in F for x in bodies_or_block)


# -- linked and binary ----------------------------------------------------------


def is_linked(members: Sequence, space: Space | None = None) -> bool:
    members = list(members)
    if not members:
        return True
    space = space or _infer_space(members[0])
    for m in members:
        sp.check_body(space, m)
    return all(sp.meets(space, a, b) for a, b in itertools.combinations(members, 2))


def _infer_space(body) -> Space:
    if isinstance(body, ArcSet):
        return sp.CIRCLE
    if isinstance(body, frozenset):
        return Discrete(max(body) + 1 if body else 1)
    return Product(tuple(_infer_space(b) for b in body))


@dataclass(frozen=True)
class Counterexample:
    """A linked subfamily with empty intersection; falsy."""

    members: tuple

    def __bool__(self):
        return False


def is_binary(F: SubbaseFamily, budget: int = 22, workers: int = 1):
    """True, or a :class:`Counterexample` witnessing a linked family with no common point.

    The search is exhaustive. Members are encoded as atom bitmasks; a branch
    keeps a pairwise-linked subfamily and its running intersection, picks
    the atom of that intersection missed by the fewest candidates, and
    branches on which of those candidates joins (one of them must, or the
    atom survives). ``2**budget`` bounds the number of search nodes.

    A blocked product family whose factor projections are all binary is
    binary: a linked family of boxes projects to a linked family in each
    factor, and the factor witnesses combine into a common point.
    """
    if F.blocks is not None:
        ok = True
        for i, f in enumerate(F.space.factors):
            proj = SubbaseFamily(f, F.projection(i))
            if is_binary(proj, budget, workers) is not True:
                ok = False
                break
        if ok:
            return True
    members = F.members
    arr, masks = sp.member_masks(F.space, members)
    found = _binary_search(masks, arr.all, 1 << budget, workers)
    if found is None:
        return True
    return Counterexample(tuple(members[i] for i in _minimize(found, masks)))


def _adjacency(masks: list[int]) -> list[int]:
    n = len(masks)
    adj = [0] * n
    for i in range(n):
        mi = masks[i]
        for j in range(i + 1, n):
            if mi & masks[j]:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


class _Search:
    def __init__(self, masks, adj, limit):
        self.masks = masks
        self.adj = adj
        self.limit = limit
        self.nodes = 0

    def run(self, chosen: list[int], R: int, cand: int):
        """Find a linked family extending ``chosen`` (running meet R) inside ``cand``."""
        self.nodes += 1
        if self.nodes > self.limit:
            raise SearchBudgetExceeded(self.limit)
        if R == 0:
            return list(chosen)
        masks = self.masks
        live = []
        for u in sp.bits(cand):
            m = masks[u] & R
            if m == 0:
                return chosen + [u]
            if m != R:
                live.append(u)
        if not live:
            return None
        best = None
        for a in sp.bits(R):
            bit = 1 << a
            missing = [u for u in live if not masks[u] & bit]
            if not missing:
                return None
            if best is None or len(missing) < len(best):
                best = missing
                if len(best) == 1:
                    break
        pool = 0
        for u in live:
            pool |= 1 << u
        for u in best:
            pool &= ~(1 << u)
            hit = self.run(chosen + [u], R & masks[u], pool & self.adj[u])
            if hit is not None:
                return hit
        return None

    def branches(self, R: int, cand: int):
        """Top-level branches as (u, candidate set) pairs, for parallel runs."""
        masks = self.masks
        live = [u for u in sp.bits(cand) if masks[u] & R != R]
        counts = []
        for a in sp.bits(R):
            bit = 1 << a
            counts.append((sum(1 for u in live if not masks[u] & bit), a))
        if not counts:
            return []
        _, a = min(counts)
        best = [u for u in live if not masks[u] & (1 << a)]
        out = []
        pool = 0
        for u in live:
            pool |= 1 << u
        for u in best:
            pool &= ~(1 << u)
            out.append((u, pool & self.adj[u]))
        return out


def _run_branch(args):
    masks, adj, limit, u, cand = args
    s = _Search(masks, adj, limit)
    return s.run([u], masks[u], cand)


def _binary_search(masks: list[int], full: int, limit: int, workers: int):
    if not masks:
        return None
    adj = _adjacency(masks)
    every = (1 << len(masks)) - 1
    search = _Search(masks, adj, limit)
    if workers <= 1:
        return search.run([], full, every)
    tasks = [(masks, adj, limit, u, cand) for u, cand in search.branches(full, every)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for hit in pool.map(_run_branch, tasks):
            if hit is not None:
                return hit
    return None


def _minimize(found: list[int], masks: list[int]) -> list[int]:
    keep = sorted(set(found))
    for i in list(keep):
        trial = [j for j in keep if j != i]
        meet = -1
        for j in trial:
            meet &= masks[j]
        if trial and meet == 0:
            keep = trial
    return keep


def naive_binary_scan(F: SubbaseFamily):
    """Reference check over all subfamilies; only for small families."""
    members = F.members
    for r in range(2, len(members) + 1):
        for sub in itertools.combinations(members, r):
            if is_linked(sub, F.space) and sp.intersect_all(F.space, sub) is None:
                return Counterexample(sub)
    return True


# -- intersection closure -------------------------------------------------------


def close_under_intersection(F: SubbaseFamily) -> SubbaseFamily:
    """Add every nonempty finite intersection of members."""
    if F.closed:
        return F
    if F.blocks is not None:
        return _close_blocks(F)
    space = F.space
    members = list(F.members)
    if isinstance(space, (Discrete, Circle)) or len(members) <= 4000:
        arr, masks = sp.member_masks(space, members)
        known = dict.fromkeys(masks)
        fresh = list(known)
        while fresh:
            new = []
            base = list(known)
            for a in fresh:
                for b in base:
                    c = a & b
                    if c and c not in known:
                        known[c] = None
                        new.append(c)
            fresh = new
        extra = [m for m in known if m not in set(masks)]
        members += [_decode(space, arr, m) for m in extra]
    return SubbaseFamily(space, sorted(members, key=lambda b: sp.sort_key(space, b)), closed=True)


def _decode(space: Space, arr: sp.Arrangement, mask: int):
    if not isinstance(space, Product):
        return arr.decode(mask)
    parts = []
    sizes = [p.size for p in arr.parts]
    for i, p in enumerate(arr.parts):
        stride = math.prod(sizes[i + 1:])
        width = sizes[i]
        sub = 0
        for bit in sp.bits(mask):
            sub |= 1 << ((bit // stride) % width)
        parts.append(p.decode(sub) if not isinstance(p.space, Product) else _decode(p.space, p, sub))
    return tuple(parts)


def _close_factor(space: Space, bodies: Sequence) -> tuple:
    return close_under_intersection(SubbaseFamily(space, bodies)).members


def _meet_families(space: Space, a: Sequence, b: Sequence) -> tuple:
    out = {}
    for x in a:
        for y in b:
            z = sp.intersect(space, x, y)
            if z is not None:
                out.setdefault(z, None)
    return tuple(out)


def _close_blocks(F: SubbaseFamily) -> SubbaseFamily:
    factors = F.space.factors
    blocks = {tuple(_close_factor(f, p) for f, p in zip(factors, b)) for b in F.blocks}
    blocks = {b for b in blocks if all(b)}
    fresh = list(blocks)
    while fresh:
        new = []
        for a in fresh:
            for b in list(blocks):
                c = tuple(_close_factor(f, _meet_families(f, x, y)) for f, x, y in zip(factors, a, b))
                if all(c) and c not in blocks:
                    blocks.add(c)
                    new.append(c)
        fresh = new
    ordered = sorted(blocks, key=lambda b: tuple(len(p) for p in b), reverse=True)
    return SubbaseFamily(F.space, closed=True, blocks=ordered)


def check_intersection_closed(F: SubbaseFamily) -> bool:
    if F.blocks is not None:
        return len(close_under_intersection(F.with_flag(False)).members) == len(F.members)
    members = F.members
    for a, b in itertools.combinations(members, 2):
        c = sp.intersect(F.space, a, b)
        if c is not None and c not in F:
            return False
    return True


# -- the neighbourhood criterion --------------------------------------------------


@dataclass(frozen=True)
class CriterionFailure:
    """Grid point x and basic closed neighbourhood U where no members fit; falsy."""

    x: object
    U: object

    def __bool__(self):
        return False


def basic_neighbourhood(space: Space, x, q: int):
    """The smallest resolution-q neighbourhood of x: {x} on discrete factors,
    the closed arc [x - 1/q, x + 1/q] on circle factors."""
    if isinstance(space, Discrete):
        return frozenset({x})
    if isinstance(space, Circle):
        return ArcSet.of(Arc(x - Turn(Fraction(1, q)), Fraction(2, q)))
    return tuple(basic_neighbourhood(f, xi, q) for f, xi in zip(space.factors, x))


def grid_neighbourhoods(space: Space, x, q: int) -> list:
    """Every resolution-q basic neighbourhood of x (used to cross-check minimality)."""
    if isinstance(space, Discrete):
        return [frozenset({x})] + [frozenset(s) for r in range(2, space.size + 1)
                                   for s in itertools.combinations(range(space.size), r) if x in s]
    if isinstance(space, Circle):
        out = []
        for before in range(1, q):
            for after in range(1, q - before + 1):
                if before + after >= q:
                    out.append(FULL)
                else:
                    out.append(ArcSet.of(Arc(x - Turn(Fraction(before, q)), Fraction(before + after, q))))
        return list(dict.fromkeys(out))
    return [tuple(p) for p in itertools.product(*(grid_neighbourhoods(f, xi, q) for f, xi in zip(space.factors, x)))]


def covers_neighbourhood(space: Space, members: Sequence, x, U) -> bool:
    """Whether the members lying in U have x in the interior of their union."""
    need = sp.all_cells(space)
    got = set()
    for m in members:
        if sp.subset(space, m, U):
            got |= sp.local_cells(space, m, x)
            if got >= need:
                return True
    return got >= need


def subbase_criterion(F: SubbaseFamily, resolution: int = 24, points=None):
    """True when every grid point has members inside its basic neighbourhood
    whose union contains it in the interior; else the first CriterionFailure.

    The condition is monotone in the neighbourhood, so checking the smallest
    grid neighbourhood of each point covers every larger one.
    """
    if not F.closed:
        raise NotIntersectionClosed("the criterion needs an intersection-closed family")
    space = F.space
    points = sp.grid_points(space, resolution) if points is None else points
    if F.blocks is not None:
        return _criterion_blocks(F, resolution, points)
    for x in points:
        U = basic_neighbourhood(space, x, resolution)
        if not covers_neighbourhood(space, F.members, x, U):
            return CriterionFailure(x, U)
    return True


def _criterion_blocks(F: SubbaseFamily, q: int, points):
    factors = F.space.factors
    cache: dict = {}

    def cells(i, part, xi):
        key = (i, id(part), xi)
        if key not in cache:
            f = factors[i]
            U = basic_neighbourhood(f, xi, q)
            got = set()
            for m in part:
                if sp.subset(f, m, U):
                    got |= sp.local_cells(f, m, xi)
            cache[key] = got
        return cache[key]

    need = sp.all_cells(F.space)
    for x in points:
        got = set()
        for b in F.blocks:
            per = [cells(i, part, xi) for i, (part, xi) in enumerate(zip(b, x))]
            got |= set(itertools.product(*per))
        if not got >= need:
            return CriterionFailure(x, basic_neighbourhood(F.space, x, q))
    return True


# -- covers and star refinement -------------------------------------------------


class Cover:
    """A finite closed-set family whose members stand in for open sets.

    A set counts as inside a member when it lies in the closed member; on
    the circle this is harmless because the power maps used here stay
    injective on closed arcs shorter than their injectivity bound.
    """

    def __init__(self, space: Space, members: Iterable, factors: Sequence[Cover] | None = None):
        self.space = space
        self.factors = tuple(factors) if factors is not None else None
        if self.factors is not None:
            members = [tuple(m) for m in itertools.product(*(c.members for c in self.factors))]
        self.members = tuple(dict.fromkeys(members))
        for m in self.members:
            sp.check_body(space, m)
        if self.factors is None:
            self._check_covers()

    @classmethod
    def product(cls, factors: Sequence[Cover]) -> Cover:
        return cls(Product(tuple(c.space for c in factors)), (), factors)

    def _check_covers(self):
        arr, masks = sp.member_masks(self.space, self.members)
        got = 0
        for m in masks:
            got |= m
        if got != arr.all:
            missing = (arr.all & ~got)
            atom = sp.bits(missing)[0]
            raise NotACover(_atom_point(self.space, arr, atom))

    def holder(self, body):
        """A member containing ``body``, or None."""
        if self.factors is not None:
            parts = [c.holder(b) for c, b in zip(self.factors, body)]
            return None if any(p is None for p in parts) else tuple(parts)
        for U in self.members:
            if sp.subset(self.space, body, U):
                return U
        return None

    def __len__(self):
        return len(self.members)


def _atom_point(space, arr, atom):
    if isinstance(space, Discrete):
        return atom
    if isinstance(space, Circle):
        i, gap = divmod(atom, 2)
        lo = arr.ends[i]
        hi = arr.ends[i + 1] if i + 1 < len(arr.ends) else 1
        return Turn(lo if not gap else (lo + hi) / 2)
    return atom


def _single_arc(U) -> Arc:
    if len(U.components) != 1:
        raise ValueError("cover members on the circle must be single arcs")
    return U.components[0]


def lebesgue_number(U: Cover) -> Fraction:
    """Largest d such that every closed arc of length d lies in a member.

    The forward reach from a point only drops just before an arc start, so
    it is enough to look at the starts: for each start s take the longest
    stretch [s, end] inside a member having s in its interior. Raises
    NotACover when some start lies in no member's interior.
    """
    arcs = [_single_arc(m) for m in U.members]
    if any(a.is_full for a in arcs):
        return Fraction(1)
    best_min = None
    for a in arcs:
        s = a.start
        reach = Fraction(0)
        for b in arcs:
            d = (s - b.start).value
            if 0 < d < b.length:
                reach = max(reach, b.length - d)
        if reach == 0:
            raise NotACover(s)
        best_min = reach if best_min is None else min(best_min, reach)
    return best_min


def star(V: Arc | ArcSet, family: Sequence) -> ArcSet:
    V = V if isinstance(V, ArcSet) else ArcSet.of(V)
    return ArcSet(a for W in family if W.intersects(V) for a in W.components)


def star_refine(U: Cover) -> Cover:
    """A cover whose member stars each lie in a member of U.

    On the circle: with Lebesgue number d, take h = 1/ceil(6/d) (at most
    d/6) and arcs of length 2h centred on the multiples of h. A star then
    spans 6h <= d. The star condition is verified before returning.
    On a discrete space the singletons always work.
    """
    space = U.space
    if U.factors is not None:
        return Cover.product([star_refine(c) for c in U.factors])
    if isinstance(space, Discrete):
        V = Cover(space, [frozenset({x}) for x in range(space.size)])
        _verify_star(U, V)
        return V
    if not isinstance(space, Circle):
        raise TypeError("star refinement is implemented for circle, discrete and product covers")
    if any(m.is_full for m in U.members):
        return U
    d = lebesgue_number(U)
    k = math.ceil(6 / d)
    h = Fraction(1, k)
    V = Cover(space, [ArcSet.of(Arc(Fraction(j, k) - h, 2 * h)) for j in range(k)])
    _verify_star(U, V)
    return V


def _circle_neighbours(members: Sequence[ArcSet]):
    """For each single-arc member, the members meeting it.

    Arcs are swept by start; only starts within the longest length before
    W, or inside W, can meet it.
    """
    arcs = [m.components[0] for m in members]
    if any(a.is_full for a in arcs):
        return [list(members) for _ in members]
    order = sorted(range(len(arcs)), key=lambda i: arcs[i].start.value)
    starts = [arcs[i].start.value for i in order]
    longest = max(a.length for a in arcs)
    n = len(order)
    out = []
    for a in arcs:
        lo = a.start.value - longest
        k = bisect.bisect_left(starts, lo % 1)
        near = []
        for step in range(n):
            j = order[(k + step) % n]
            d = (arcs[j].start - Turn(lo)).value
            if d > longest + a.length:
                break
            if members[j].intersects(ArcSet.of(a)):
                near.append(members[j])
        out.append(near)
    return out


def _verify_star(U: Cover, V: Cover) -> None:
    space = V.space
    if isinstance(space, Circle):
        stars = [ArcSet(c for X in near for c in X.components) for near in _circle_neighbours(V.members)]
    else:
        stars = [sp.union(space, [X for X in V.members if sp.meets(space, X, W)]) for W in V.members]
    for W, S in zip(V.members, stars):
        if U.holder(S) is None:
            raise StarRefinementFailed(f"star of {sp.format_body(space, W)} lies in no cover member")


def star_condition_holds(U: Cover, V: Cover) -> bool:
    try:
        _verify_star(U, V)
    except StarRefinementFailed:
        return False
    return True


def random_arc_cover(rng, max_den: int = 40, max_len: Fraction = Fraction(1, 2)) -> Cover:
    """Arcs with random rational endpoints, added until their interiors
    cover the circle (so the Lebesgue number is positive)."""
    arcs: list[ArcSet] = []
    while True:
        den = rng.randint(2, max_den)
        start = Fraction(rng.randrange(den), den)
        ln = Fraction(rng.randint(1, den - 1), den)
        ln = min(ln, max_len)
        arcs.append(ArcSet.of(Arc(start, ln)))
        try:
            U = Cover(sp.CIRCLE, arcs)
            lebesgue_number(U)
        except NotACover:
            continue
        return U


# -- restriction and invariance -------------------------------------------------


def restrict_to_cover(F: SubbaseFamily, U: Cover) -> SubbaseFamily:
    """Members lying inside some cover member."""
    if F.blocks is not None and U.factors is not None:
        blocks = []
        for b in F.blocks:
            parts = [tuple(m for m in part if c.holder(m) is not None) for part, c in zip(b, U.factors)]
            blocks.append(parts)
        return SubbaseFamily(F.space, closed=F.closed, blocks=blocks)
    return SubbaseFamily(F.space, [m for m in F.members if U.holder(m) is not None], F.closed)


def is_translation_invariant(F: SubbaseFamily, generators: Iterable) -> bool:
    space = F.space
    if not sp.has_group(space):
        raise sp.NoGroupStructure(str(space))
    for g in generators:
        for m in F.members:
            if sp.translate(space, g, m) not in F:
                return False
    return True


# -- stock families -----------------------------------------------------------


def stock_circle_family(q: int = 24, max_length: Fraction = Fraction(1, 4)) -> SubbaseFamily:
    """All closed arcs of length <= max_length with endpoints in (1/q)Z, plus the circle."""
    members = [FULL]
    top = int(max_length * q)
    for j in range(q):
        for k in range(top + 1):
            members.append(ArcSet.of(Arc(Fraction(j, q), Fraction(k, q))))
    return SubbaseFamily(sp.CIRCLE, members, closed=True)


def stock_finite_family(space: Discrete) -> SubbaseFamily:
    """Singletons plus the whole set."""
    members = [frozenset(range(space.size))] + [frozenset({x}) for x in range(space.size)]
    return SubbaseFamily(space, members, closed=True)


def stock_family(space: Space, q: int = 24) -> SubbaseFamily:
    if isinstance(space, Circle):
        return stock_circle_family(q)
    if isinstance(space, Discrete):
        return stock_finite_family(space)
    parts = [stock_family(f, q).members for f in space.factors]
    return SubbaseFamily(space, closed=True, blocks=[parts])


def point_family() -> SubbaseFamily:
    return SubbaseFamily(sp.POINT, [frozenset({0})], closed=True)
