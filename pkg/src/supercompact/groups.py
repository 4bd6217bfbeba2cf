"""Finite groups given by Cayley tables.

Elements are the integers ``0..order-1`` and the identity is always ``0``.
Everything here is immutable; subgroups, homomorphisms and quotients are
plain values that can be compared and hashed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class AxiomViolation(ValueError):
    """A Cayley table that fails one of the group axioms."""

    def __init__(self, kind: str, witness: tuple[int, ...]):
        self.kind = kind
        self.witness = witness
        super().__init__(f"{kind} fails at {witness}")


class NotNormal(ValueError):
    def __init__(self, g: int, n: int):
        self.witness = (g, n)
        super().__init__(f"conjugate of {n} by {g} leaves the subgroup")


class HypothesisUnmet(Exception):
    """Raised by the lemma checkers when the inputs do not meet the hypotheses."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def identity(self) -> int:
        return 0

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __len__(self):
        return len(self.table)

    def __repr__(self):
        return f"FiniteGroup({self.name or 'order ' + str(self.order)})"

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @cached_property
    def inverses(self) -> tuple[int, ...]:
        return tuple(row.index(0) for row in self.table)

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, g: int, x: int) -> int:
        """g x g^-1"""
        return self.table[self.table[g][x]][self.inverses[g]]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        return tuple(self.element_order(a) for a in range(self.order))

    def elements(self) -> range:
        return range(self.order)

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def center(self) -> Subgroup:
        t = self.table
        els = [a for a in range(self.order) if all(t[a][b] == t[b][a] for b in range(self.order))]
        return Subgroup(self, tuple(els))

    def closure(self, gens: Iterable[int]) -> tuple[int, ...]:
        """Sorted elements of the subgroup generated by ``gens``."""
        gens = [g for g in set(gens) if g != 0]
        seen = {0}
        frontier = [0]
        t = self.table
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = t[x][g]
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return tuple(sorted(seen))

    def subgroup(self, gens: Iterable[int]) -> Subgroup:
        return Subgroup(self, self.closure(gens))

    def trivial_subgroup(self) -> Subgroup:
        return Subgroup(self, (0,))

    def whole(self) -> Subgroup:
        return Subgroup(self, tuple(range(self.order)))

    def normal_closure(self, elements: Iterable[int]) -> Subgroup:
        gens = set(elements)
        while True:
            sub = self.closure(gens)
            conjugates = {self.conj(g, x) for g in range(self.order) for x in sub}
            if conjugates <= set(sub):
                return Subgroup(self, sub)
            gens |= conjugates

    @cached_property
    def _subgroups(self) -> tuple[Subgroup, ...]:
        # Grow subgroups one generator at a time; every subgroup of a group
        # of order <= 2^k is reached by a chain of at most k extensions.
        found = {(0,)}
        frontier = [(0,)]
        while frontier:
            nxt = []
            for sub in frontier:
                members = set(sub)
                for g in range(1, self.order):
                    if g in members:
                        continue
                    ext = self.closure(sub + (g,))
                    if ext not in found:
                        found.add(ext)
                        nxt.append(ext)
            frontier = nxt
        subs = sorted(found, key=lambda s: (len(s), s))
        return tuple(Subgroup(self, s) for s in subs)

    def subgroups(self) -> list[Subgroup]:
        return list(self._subgroups)


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    elements: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(set(self.elements))))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.elementset

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"Subgroup({list(self.elements)})"

    @cached_property
    def elementset(self) -> frozenset[int]:
        return frozenset(self.elements)

    def is_subgroup(self) -> bool:
        G = self.parent
        s = self.elementset
        return 0 in s and all(G.mul(a, G.inv(b)) in s for a in s for b in s)

    @cached_property
    def normal(self) -> bool:
        return self.conjugation_witness() is None

    def conjugation_witness(self) -> tuple[int, int] | None:
        G = self.parent
        for g in range(G.order):
            for n in self.elements:
                if G.conj(g, n) not in self.elementset:
                    return g, n
        return None

    def __and__(self, other: Subgroup) -> Subgroup:
        return Subgroup(self.parent, tuple(self.elementset & other.elementset))

    def __le__(self, other: Subgroup) -> bool:
        return self.elementset <= other.elementset

    def __lt__(self, other: Subgroup) -> bool:
        return self.elementset < other.elementset

    def product(self, other: Subgroup) -> Subgroup:
        """The set HK; a subgroup whenever one factor is normal."""
        G = self.parent
        return Subgroup(G, tuple({G.mul(a, b) for a in self.elements for b in other.elements}))


@dataclass(frozen=True)
class GroupHom:
    domain: FiniteGroup
    codomain: FiniteGroup
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if len(self.map) != self.domain.order:
            raise ValueError("map must have one entry per domain element")
        if any(not 0 <= y < self.codomain.order for y in self.map):
            raise ValueError("map entries out of range")

    def __call__(self, x: int) -> int:
        return self.map[x]

    def is_homomorphism(self) -> bool:
        D, C, f = self.domain, self.codomain, self.map
        if f[0] != 0:
            return False
        return all(f[D.mul(a, b)] == C.mul(f[a], f[b]) for a in range(D.order) for b in range(D.order))

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.codomain.order

    def is_injective(self) -> bool:
        return len(set(self.map)) == self.domain.order

    def image(self) -> Subgroup:
        return Subgroup(self.codomain, tuple(set(self.map)))

    def compose(self, inner: GroupHom) -> GroupHom:
        """self after inner."""
        if inner.codomain != self.domain:
            raise ValueError("homomorphisms do not compose")
        return GroupHom(inner.domain, self.codomain, tuple(self.map[y] for y in inner.map))

    @classmethod
    def identity(cls, G: FiniteGroup) -> GroupHom:
        return cls(G, G, tuple(range(G.order)))


# -- construction and validation ---------------------------------------------


def validate_group(table: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
    """Check the group axioms exhaustively and return the group.

    Raises :class:`AxiomViolation` with a witness on the first failure found.
    """
    T = np.asarray(table, dtype=np.int64)
    n = T.shape[0] if T.ndim == 2 else 0
    if T.ndim != 2 or T.shape != (n, n) or n == 0:
        raise ValueError("Cayley table must be a non-empty square array")
    if T.min() < 0 or T.max() >= n:
        raise ValueError("Cayley table entries out of range")
    ar = np.arange(n)
    left = T[T]  # left[a, b, c] = (a b) c
    right = T[ar[:, None, None], T[None, :, :]]  # right[a, b, c] = a (b c)
    bad = np.argwhere(left != right)
    if len(bad):
        raise AxiomViolation("associativity", tuple(int(v) for v in bad[0]))
    if not (np.array_equal(T[0, :], ar) and np.array_equal(T[:, 0], ar)):
        bad = int(np.flatnonzero((T[0, :] != ar) | (T[:, 0] != ar))[0])
        raise AxiomViolation("identity", (bad,))
    for a in range(n):
        row = np.flatnonzero(T[a] == 0)
        if len(row) != 1 or T[row[0], a] != 0:
            raise AxiomViolation("inverse", (a,))
    return FiniteGroup(tuple(tuple(int(v) for v in r) for r in T), name)


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)), f"Z{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Element (g, h) has index ``g * |H| + h``."""
    m = H.order
    table = tuple(
        tuple(G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(G.order * m))
        for a in range(G.order * m)
    )
    return FiniteGroup(table, f"{G.name or G.order}x{H.name or H.order}")


def pair_index(G: FiniteGroup, H: FiniteGroup, g: int, h: int) -> int:
    return g * H.order + h


def product_projections(G: FiniteGroup, H: FiniteGroup) -> tuple[GroupHom, GroupHom]:
    P = direct_product(G, H)
    m = H.order
    return (
        GroupHom(P, G, tuple(x // m for x in range(P.order))),
        GroupHom(P, H, tuple(x % m for x in range(P.order))),
    )


def from_permutations(gens: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
    """Permutation group generated by ``gens``; elements sorted lexicographically."""
    gens = [tuple(g) for g in gens]
    degree = len(gens[0]) if gens else 1
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(p[g[i]] for i in range(degree))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    els = sorted(seen)
    index = {p: i for i, p in enumerate(els)}
    table = tuple(tuple(index[tuple(p[q[i]] for i in range(degree))] for q in els) for p in els)
    return FiniteGroup(table, name)


def symmetric(n: int) -> FiniteGroup:
    if n <= 1:
        return FiniteGroup(((0,),), f"S{n}")
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    return from_permutations(gens, f"S{n}")


def alternating(n: int) -> FiniteGroup:
    if n <= 2:
        return FiniteGroup(((0,),), f"A{n}")
    gens = [_three_cycle(n, 0, 1, k) for k in range(2, n)]
    return from_permutations(gens, f"A{n}")


def _three_cycle(n: int, a: int, b: int, c: int) -> tuple[int, ...]:
    p = list(range(n))
    p[a], p[b], p[c] = b, c, a
    return tuple(p)


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return from_permutations([rot, ref], f"D{n}")


def quaternion() -> FiniteGroup:
    # regular representation of Q8 on {±1, ±i, ±j, ±k}
    names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    mult = {
        ("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
        ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
        ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j",
    }

    def m(a, b):
        sa, a = (a[0] == "-"), a.lstrip("-")
        sb, b = (b[0] == "-"), b.lstrip("-")
        if a == "1":
            r = b
        elif b == "1":
            r = a
        else:
            r = mult[(a, b)]
        neg = sa ^ sb ^ r.startswith("-")
        r = r.lstrip("-")
        return ("-" if neg else "") + r

    idx = {s: i for i, s in enumerate(names)}
    perms = [tuple(idx[m(g, x)] for x in names) for g in names]
    return from_permutations(perms, "Q8")


def semidirect_grid_group(q: int) -> FiniteGroup:
    """The subgroup of the circle-by-flip semidirect product with angles in (1/q)Z.

    Element ``(k/q, flip)`` has index ``k + q*flip``.
    """
    def mul(a, b):
        ka, fa = a % q, a // q
        kb, fb = b % q, b // q
        k = (ka + (-kb if fa else kb)) % q
        return k + q * (fa ^ fb)

    n = 2 * q
    return FiniteGroup(tuple(tuple(mul(a, b) for b in range(n)) for a in range(n)), f"T{q}xZ2")


# -- subgroup lattice ---------------------------------------------------------


def normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """All normal subgroups, sorted by order then element list."""
    return [H for H in G.subgroups() if H.normal]


def is_simple(G: FiniteGroup) -> bool:
    return G.order > 1 and len(normal_subgroups(G)) == 2


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, GroupHom]:
    """The coset group G/N and the canonical epimorphism.

    Cosets are numbered by their smallest element, so the coset N is 0.
    """
    w = N.conjugation_witness()
    if w is not None:
        raise NotNormal(*w)
    label = [-1] * G.order
    reps = []
    for x in range(G.order):
        if label[x] < 0:
            for n in N.elements:
                label[G.mul(x, n)] = len(reps)
            reps.append(x)
    table = tuple(tuple(label[G.mul(a, b)] for b in reps) for a in reps)
    Q = FiniteGroup(table, f"{G.name or G.order}/{N.order}")
    return Q, GroupHom(G, Q, tuple(label))


def kernel(f: GroupHom) -> Subgroup:
    return Subgroup(f.domain, tuple(x for x in range(f.domain.order) if f.map[x] == 0))


def preimage(f: GroupHom, H: Subgroup) -> Subgroup:
    return Subgroup(f.domain, tuple(x for x in range(f.domain.order) if f.map[x] in H))


def image(f: GroupHom, H: Subgroup) -> Subgroup:
    return Subgroup(f.codomain, tuple({f.map[x] for x in H}))


# -- isomorphism search -------------------------------------------------------


def _generators(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    current = (0,)
    by_order = sorted(range(1, G.order), key=lambda a: (-G.element_orders[a], a))
    while len(current) < G.order:
        g = next(a for a in by_order if a not in current)
        gens.append(g)
        current = G.closure(gens)
    return gens


def find_isomorphism(G: FiniteGroup, H: FiniteGroup, limit: int = 64) -> GroupHom | None:
    """Search for an isomorphism G -> H by extending images of generators.

    Candidate images are pruned by element order. Only intended for small
    groups; raises ``ValueError`` above ``limit``.
    """
    if G.order != H.order:
        return None
    if G.order > limit:
        raise ValueError(f"isomorphism search limited to order {limit}")
    if sorted(G.element_orders) != sorted(H.element_orders):
        return None
    gens = _generators(G)
    candidates = [[h for h in range(H.order) if H.element_orders[h] == G.element_orders[g]] for g in gens]

    def extend(images: Sequence[int]) -> list[int] | None:
        f = [-1] * G.order
        f[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g, h in zip(gens, images):
                    y, fy = G.mul(x, g), H.mul(f[x], h)
                    if f[y] < 0:
                        f[y] = fy
                        nxt.append(y)
                    elif f[y] != fy:
                        return None
            frontier = nxt
        return f

    for images in itertools.product(*candidates):
        f = extend(images)
        if f is None or len(set(f)) != G.order:
            continue
        hom = GroupHom(G, H, tuple(f))
        if hom.is_homomorphism():
            return hom
    return None


# -- normal resolutions -------------------------------------------------------


@dataclass(frozen=True)
class FiniteQuotient:
    kernel_order: int


@dataclass(frozen=True)
class SimpleFactor:
    C: Subgroup


@dataclass(frozen=True)
class NormalResolution:
    group: FiniteGroup
    chain: tuple[Subgroup, ...]
    certificates: tuple[FiniteQuotient | SimpleFactor, ...]

    def validate(self) -> bool:
        G, chain = self.group, self.chain
        if not chain or chain[0].order != G.order or chain[-1].order != 1:
            return False
        if len(self.certificates) != len(chain) - 1:
            return False
        if not all(H.normal for H in chain):
            return False
        for H, K, cert in zip(chain, chain[1:], self.certificates):
            if not K < H:
                return False
            if isinstance(cert, FiniteQuotient):
                if cert.kernel_order != H.order // K.order:
                    return False
            else:
                if not cert.C.normal or (cert.C & H) != K:
                    return False
                if not is_simple(quotient(G, cert.C)[0]):
                    return False
        return True

    def kernel_orders(self) -> list[int]:
        return [H.order // K.order for H, K in zip(self.chain, self.chain[1:])]


def resolve_finite(G: FiniteGroup) -> NormalResolution:
    """Descend through largest proper G-normal subgroups down to the trivial group.

    Ties between candidates of equal order go to the lexicographically
    smallest element list.
    """
    normals = normal_subgroups(G)
    chain = [G.whole()]
    while chain[-1].order > 1:
        top = chain[-1]
        inside = [N for N in normals if N < top]
        best = max(N.order for N in inside)
        chain.append(min((N for N in inside if N.order == best), key=lambda N: N.elements))
    certs = tuple(FiniteQuotient(H.order // K.order) for H, K in zip(chain, chain[1:]))
    return NormalResolution(G, tuple(chain), certs)


# -- the two product lemmas ---------------------------------------------------


def box1_hypotheses(N: FiniteGroup, L: FiniteGroup, G: Subgroup) -> bool:
    """pr_N(G) = N and pr_L(ker q) = L, where q is pr_N restricted to G."""
    m = L.order
    onto_N = {x // m for x in G} == set(range(N.order))
    ker_q_onto_L = {x % m for x in G if x // m == 0} == set(range(m))
    return onto_N and ker_q_onto_L


def check_box1(N: FiniteGroup, L: FiniteGroup, G: Subgroup) -> bool:
    """Whether the subgroup G of N x L is all of N x L."""
    if G.parent.order != N.order * L.order:
        raise ValueError("G must be a subgroup of N x L")
    return G.order == N.order * L.order


def check_giot_finite(G: FiniteGroup, A: Subgroup, B: Subgroup, C: Subgroup) -> bool:
    """Confirm G/B = (G/A) x (G/C) through the diagonal map.

    Hypotheses: A, B, C normal, A & C == B, and A maps onto G/C (AC = G),
    which stands in for "A/B infinite" plus simplicity of G/C. Raises
    :class:`HypothesisUnmet` otherwise.
    """
    if not (A.normal and B.normal and C.normal):
        raise HypothesisUnmet("A, B, C must be normal")
    if (A & C) != B:
        raise HypothesisUnmet("A & C != B")
    if A.product(C).order != G.order:
        raise HypothesisUnmet("A/B does not map onto G/C")
    GB, qB = quotient(G, B)
    GA, qA = quotient(G, A)
    GC, qC = quotient(G, C)
    P = direct_product(GA, GC)
    diag = [-1] * GB.order
    for x in range(G.order):
        diag[qB(x)] = pair_index(GA, GC, qA(x), qC(x))
    diag_hom = GroupHom(GB, P, tuple(diag))
    if not diag_hom.is_homomorphism() or not diag_hom.is_injective():
        return False
    if not check_box1(GA, GC, diag_hom.image()):
        return False
    return find_isomorphism(GB, P) is not None


def normal_triples(G: FiniteGroup) -> Iterable[tuple[Subgroup, Subgroup, Subgroup]]:
    """All (A, B, C) of normal subgroups with A & C == B."""
    normals = normal_subgroups(G)
    for A in normals:
        for C in normals:
            yield A, A & C, C


def fixture_groups(max_order: int = 16) -> list[FiniteGroup]:
    """Small groups used by the exhaustive sweeps."""
    gs = [cyclic(n) for n in range(1, 17)]
    z2, z4 = cyclic(2), cyclic(4)
    gs += [
        direct_product(z2, z2),
        direct_product(direct_product(z2, z2), z2),
        direct_product(z2, z4),
        direct_product(z4, z4),
        direct_product(z2, cyclic(8)),
        direct_product(z2, cyclic(6)),
        symmetric(3),
        dihedral(4),
        quaternion(),
        alternating(4),
        dihedral(5),
        dihedral(6),
        dihedral(8),
        direct_product(quaternion(), z2),
        direct_product(symmetric(3), z2),
    ]
    return [g for g in gs if g.order <= max_order]
