"""Compact groups presented as (T^m x F)/N with N finite and central, and the
semidirect product of the circle by the flip x -> -x.

For the torus part the quotient T^m/K is modelled concretely. Write d_i for
the order of the projection L_i of K to coordinate i, D_L = diag(d_i) and
Lambda_K for the lattice of lifts of K. The integer lattice D_L Lambda_K is
brought to the form U D with U lower unitriangular and D diagonal; then

    Phi(x) = (U D)^-1 D_L x

is an isomorphism T^m/K -> T^m, and in these coordinates the map onto
T^m/L is u -> D u, a product of circle power maps with kernel of order
|L|/|K|. The simple-factor steps are plain coordinate projections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import invseq as iv
from . import spaces as sp
from .circle import Turn, frac
from .groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    cyclic,
    is_simple,
    quotient,
    resolve_finite,
    semidirect_grid_group,
)
from .spaces import CIRCLE, POINT, Circle, Discrete


class NotCentral(ValueError):
    def __init__(self, generator, witness: int):
        self.generator = generator
        self.witness = witness
        super().__init__(f"generator {generator} does not commute with element {witness}")


class NotFinite(ValueError):
    pass


class UnsupportedPresentation(ValueError):
    pass


class UnsupportedEpimorphism(ValueError):
    pass


class WitnessFailure(AssertionError):
    pass


class ConjugationMismatch(AssertionError):
    pass


MAX_SUBGROUP = 100_000


# -- presentations --------------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    """(T^m x F)/N, where N is generated by ``gens``: pairs (turns, f_index)."""

    m: int
    F: FiniteGroup = field(default_factory=lambda: cyclic(1))
    gens: tuple = ()

    def __post_init__(self):
        gens = []
        for g in self.gens:
            turns, f = g if isinstance(g, tuple) and len(g) == 2 and isinstance(g[0], tuple) else (tuple(g), 0)
            turns = tuple(t if isinstance(t, Turn) else Turn(frac(t)) for t in turns)
            if len(turns) != self.m:
                raise ValueError(f"generator {g} needs {self.m} circle coordinates")
            if not 0 <= f < self.F.order:
                raise ValueError(f"finite index {f} out of range")
            gens.append((turns, f))
        object.__setattr__(self, "gens", tuple(gens))
        self.validate()

    @classmethod
    def torus(cls, m: int, *gens) -> Presentation:
        return cls(m, cyclic(1), tuple((tuple(g), 0) for g in gens))

    @classmethod
    def finite(cls, F: FiniteGroup, *gens: int) -> Presentation:
        return cls(0, F, tuple(((), g) for g in gens))

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a[0], b[0])), self.F.mul(a[1], b[1])

    def identity(self):
        return tuple(Turn(0) for _ in range(self.m)), 0

    def subgroup_elements(self) -> list:
        """N, listed by breadth-first closure from the identity."""
        start = self.identity()
        seen = {start: None}
        frontier = [start]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen[y] = None
                        nxt.append(y)
                        if len(seen) > MAX_SUBGROUP:
                            raise NotFinite("the generated subgroup is too large to enumerate")
            frontier = nxt
        return list(seen)

    def validate(self) -> None:
        F = self.F
        for turns, f in self.gens:
            for h in range(F.order):
                if F.mul(f, h) != F.mul(h, f):
                    raise NotCentral((turns, f), h)

    @property
    def N_finite_part(self) -> Subgroup:
        return Subgroup(self.F, tuple({f for _, f in self.subgroup_elements()}))

    def __str__(self):
        trivial = self.F.order == 1
        parts = []
        for turns, f in self.gens:
            coords = " ".join(str(t) for t in turns)
            parts.append(f"({coords})" if trivial else f"({coords} | {f})")
        base = [f"T^{self.m}" if self.m != 1 else "T"] if self.m else []
        if not trivial or not self.m:
            base.append(self.F.name or f"F{self.F.order}")
        head = " x ".join(base)
        return f"({head})/<{', '.join(parts)}>" if parts else head


# -- torus lattice algebra --------------------------------------------------------


@dataclass(frozen=True)
class TorusQuotient:
    """The explicit model of T^m/K described in the module docstring."""

    m: int
    K: tuple
    d: tuple
    U: tuple
    D: tuple

    @property
    def L_order(self) -> int:
        return math.prod(self.d)

    @property
    def K_order(self) -> int:
        return len(self.K)

    def phi_matrix(self) -> list[list[Fraction]]:
        """(U D)^-1 D_L as a matrix of Fractions; integral by construction."""
        m = self.m
        UD = [[Fraction(self.U[i][j] * self.D[j]) for j in range(m)] for i in range(m)]
        inv = _inverse(UD)
        return [[inv[i][j] * self.d[j] for j in range(m)] for i in range(m)]

    def phi(self, x: Sequence[Turn]) -> tuple:
        M = self.phi_matrix()
        return tuple(Turn(sum(M[i][j] * x[j].value for j in range(self.m))) for i in range(self.m))

    def top(self, u: Sequence[Turn]) -> tuple:
        return tuple(ui * di for ui, di in zip(u, self.D))

    def reduced(self, x: Sequence[Turn]) -> tuple:
        """U^-1 D_L x: the point of T^m/L seen in the stage coordinates."""
        Uinv = _inverse([[Fraction(v) for v in row] for row in self.U])
        y = [xi.value * di for xi, di in zip(x, self.d)]
        return tuple(Turn(sum(Uinv[i][j] * y[j] for j in range(self.m))) for i in range(self.m))


def _inverse(A: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(A)
    M = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [v / piv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def _lower_hnf(gens: list[list[int]], m: int) -> list[list[int]]:
    """Lower-triangular column basis of the integer lattice spanned by ``gens``."""
    rows = [list(g) for g in gens]
    basis = [[0] * m for _ in range(m)]
    for j in range(m):
        live = [r for r in rows if r[j] != 0]
        rest = [r for r in rows if r[j] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[j]))
            p = live[0]
            nxt = [p]
            for r in live[1:]:
                q = r[j] // p[j]
                r2 = [a - q * b for a, b in zip(r, p)]
                (nxt if r2[j] != 0 else rest).append(r2)
            live = nxt
        if not live:
            raise NotFinite("the lattice does not have full rank")
        p = live[0]
        if p[j] < 0:
            p = [-v for v in p]
        for i in range(m):
            basis[i][j] = p[i]
        rows = rest
    return basis


def _split_unitriangular(H: list[list[int]], m: int):
    """Column operations turning lower-triangular H into U * diag(D), U unitriangular."""
    H = [row[:] for row in H]
    D = [H[j][j] for j in range(m)]
    for j in range(m):
        h = D[j]
        later = list(range(j + 1, m))
        found = None
        for cs in itertools.product(range(h), repeat=len(later)):
            col = [H[i][j] + sum(c * H[i][k] for c, k in zip(cs, later)) for i in range(m)]
            if all(col[i] % h == 0 for i in range(j + 1, m)):
                found = col
                break
        if found is None:
            raise UnsupportedPresentation("torus quotient does not split into power maps")
        for i in range(m):
            H[i][j] = found[i]
    U = tuple(tuple(H[i][j] // D[j] for j in range(m)) for i in range(m))
    return U, tuple(D)


def torus_quotient(m: int, K: Sequence[tuple]) -> TorusQuotient:
    K = tuple(sorted(K))
    d = tuple(math.lcm(*(k[i].value.denominator for k in K)) for i in range(m))
    gens = []
    for k in K:
        gens.append([k[i].value * d[i] for i in range(m)])
    for i in range(m):
        gens.append([d[i] if j == i else 0 for j in range(m)])
    ints = [[int(v) for v in g] for g in gens]
    H = _lower_hnf(ints, m)
    U, D = _split_unitriangular(H, m)
    return TorusQuotient(m, K, d, U, D)


# -- decomposition ----------------------------------------------------------------


@dataclass(frozen=True)
class FiniteSimple:
    group: FiniteGroup

    def __str__(self):
        return f"FiniteSimple({self.group.name or self.group.order})"


@dataclass(frozen=True)
class DecompositionStep:
    kind: str
    order: int = 1
    factor: object = None
    witness: str = ""

    def __str__(self):
        if self.kind == "FiniteKernel":
            return f"FiniteKernel({self.order})"
        f = "T" if isinstance(self.factor, Circle) else str(self.factor)
        return f"ProductBySimple({f})"


def _check_parts(P: Presentation):
    elements = P.subgroup_elements()
    if P.m and P.F.order > 1 and any(f != 0 for _, f in elements):
        raise UnsupportedPresentation("N must lie in the torus when both parts are present")
    return elements


def decompose_presentation(P: Presentation, verify: bool = True) -> list[DecompositionStep]:
    """Steps from the group down to the trivial group, top step first."""
    elements = _check_parts(P)
    if P.m == 0:
        Q = _finite_quotient(P.F, elements)
        return _finite_steps(Q)
    tq = torus_quotient(P.m, [t for t, _ in elements])
    if verify:
        verify_torus_witnesses(tq)
    steps = []
    extra = tq.L_order // tq.K_order
    if extra != 1:
        steps.append(DecompositionStep(
            "FiniteKernel", extra,
            witness=f"u -> diag({', '.join(map(str, tq.D))}) u; kernel order {extra} = |L|/|K| = {tq.L_order}/{tq.K_order}",
        ))
    for i in range(P.m, 0, -1):
        steps.append(DecompositionStep("ProductBySimple", factor=CIRCLE, witness=f"drop circle coordinate {i}"))
    if P.F.order > 1:
        steps += _finite_steps(P.F)
    return steps


def _finite_quotient(F: FiniteGroup, elements) -> FiniteGroup:
    N = Subgroup(F, tuple(f for _, f in elements))
    if N.order == 1:
        return F
    return quotient(F, N)[0]


def _finite_steps(G: FiniteGroup) -> list[DecompositionStep]:
    if G.order == 1:
        return []
    if is_simple(G) and not G.is_abelian():
        return [DecompositionStep("ProductBySimple", factor=FiniteSimple(G), witness="drop the simple finite factor")]
    res = resolve_finite(G)
    return [
        DecompositionStep("FiniteKernel", H.order // K.order, witness=f"G/{K.order} -> G/{H.order}")
        for H, K in zip(res.chain, res.chain[1:])
    ]


@dataclass
class WitnessReport:
    grid: int
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok in self.checks)

    def add(self, name: str, ok: bool):
        self.checks.append((name, ok))


def verify_torus_witnesses(tq: TorusQuotient, grid_den: int | None = None) -> WitnessReport:
    """Check the model of T^m/K pointwise on a rational grid.

    The grid denominator defaults to twice the lcm of the d_i and is always
    a multiple of every denominator occurring in K.
    """
    m = tq.m
    q = grid_den or 2 * math.lcm(*tq.d)
    if any(q % di for di in tq.d):
        raise ValueError("grid must contain L")
    pts = list(itertools.product(*[[Turn(Fraction(k, q)) for k in range(q)]] * m))
    rep = WitnessReport(q)
    zero = tuple(Turn(0) for _ in range(m))
    phi = {x: tq.phi(x) for x in pts}
    M = tq.phi_matrix()
    rep.add("phi is integral", all(v.denominator == 1 for row in M for v in row))
    sample = pts if len(pts) <= 100 else pts[:: max(1, len(pts) // 100)]
    add = lambda a, b: tuple(x + y for x, y in zip(a, b))
    rep.add("phi is a homomorphism", all(phi[add(a, b)] == add(phi[a], phi[b]) for a in sample for b in pts))
    kernel = sorted(x for x in pts if phi[x] == zero)
    rep.add("ker phi = K", kernel == sorted(tq.K))
    rep.add("top map after phi is the reduction mod L", all(tq.top(phi[x]) == tq.reduced(x) for x in pts))
    top_kernel = [u for u in pts if tq.top(u) == zero]
    rep.add("top kernel order = |L|/|K|", len(top_kernel) == tq.L_order // tq.K_order)
    L = [x for x in pts if all((x[i] * tq.d[i]) == Turn(0) for i in range(m))]
    rep.add("|L| = prod d_i", len(L) == tq.L_order)
    rep.add("|L| = |K| |L/K| by fibres", len({phi[x] for x in L}) * tq.K_order == len(L))
    Minv = _inverse(M)
    surj = True
    for y in pts:
        x = tuple(Turn(sum(Minv[i][j] * y[j].value for j in range(m))) for i in range(m))
        if tq.phi(x) != y:
            surj = False
            break
    rep.add("phi is onto", surj)
    if not rep.ok:
        bad = [n for n, ok in rep.checks if not ok]
        raise WitnessFailure("; ".join(bad))
    return rep


# -- sequences ---------------------------------------------------------------------


def build_sequence(P: Presentation) -> iv.InverseSeq:
    """The inverse sequence from the trivial group up to a model of P."""
    elements = _check_parts(P)
    if P.m == 0:
        Q = _finite_quotient(P.F, elements)
        return finite_sequence(Q)
    tq = torus_quotient(P.m, [t for t, _ in elements])
    verify_torus_witnesses(tq)
    if P.F.order > 1:
        base = finite_sequence(P.F)
        stages, maps, labels = list(base.stages), list(base.maps), list(base.labels)
    else:
        stages, maps, labels = [POINT], [], ["1"]
    for i in range(P.m):
        below = stages[-1]
        m = iv.drop(below, CIRCLE)
        stages.append(m.source)
        maps.append(m)
        labels.append(_label(P.F, i + 1))
    extra = tq.L_order // tq.K_order
    if extra != 1:
        top_space = stages[-1]
        parts = [iv.CirclePower(n) for n in tq.D]
        if P.F.order > 1:
            parts = [iv.FiniteHom(GroupHom.identity(P.F))] + parts
        if isinstance(top_space, Circle):
            real = parts[0]
        else:
            real = iv.Factorwise(tuple(parts))
        stages.append(top_space)
        maps.append(iv.BondingMap(top_space, top_space, real))
        labels.append(str(P))
    return iv.InverseSeq(tuple(stages), tuple(maps), labels=tuple(labels))


def _label(F: FiniteGroup, k: int) -> str:
    t = "T" if k == 1 else f"T^{k}"
    return t if F.order == 1 else f"{F.name or 'F'} x {t}"


def finite_sequence(G: FiniteGroup) -> iv.InverseSeq:
    """Point up to G: one drop for a non-abelian simple G, else a quotient tower."""
    if G.order == 1:
        return iv.InverseSeq((POINT,), (), labels=("1",))
    if is_simple(G) and not G.is_abelian():
        m = iv.drop(POINT, Discrete.of_group(G))
        return iv.InverseSeq((POINT, m.source), (m,), labels=("1", G.name or str(G.order)))
    res = resolve_finite(G)
    tower = iv.quotient_tower(G, res.chain)
    S = iv.profinite_sequence(tower)
    labels = tuple(f"{G.name or 'G'}/[{H.order}]" if H.order > 1 else (G.name or "G") for H in res.chain)
    return iv.InverseSeq(S.stages, S.maps, labels=("1",) + labels[1:])


def build_sequence_relative(f: iv.BondingMap) -> iv.InverseSeq:
    """A sequence whose base is the codomain of f and whose top is its domain."""
    r = f.realization
    if isinstance(r, (iv.FiniteHom, iv.CirclePower, iv.DropFactor, iv.Factorwise)):
        return iv.InverseSeq((f.target, f.source), (f,))
    if isinstance(r, iv.Compose) and r.maps:
        maps = list(reversed(r.maps))
        stages = [maps[0].target] + [m.source for m in maps]
        try:
            return iv.InverseSeq(tuple(stages), tuple(maps))
        except iv.InvalidSequence as exc:
            raise UnsupportedEpimorphism(str(exc)) from exc
    raise UnsupportedEpimorphism(f"{r} is not a representable epimorphism")


def torus_projection(m: int, k: int) -> iv.BondingMap:
    """T^m -> T^k onto the first k coordinates, as a composite of drops."""
    if not 0 <= k <= m or m < 1:
        raise UnsupportedEpimorphism("need 0 <= k <= m and m >= 1")
    maps = []
    space = POINT
    spaces = [POINT]
    for _ in range(m):
        space = sp.extend_space(space, CIRCLE)
        spaces.append(space)
    for j in range(m, k, -1):
        maps.append(iv.drop(spaces[j - 1], CIRCLE))
    if len(maps) == 1:
        return maps[0]
    return iv.BondingMap(spaces[m], spaces[k], iv.Compose(tuple(maps)))


# -- the circle-by-flip semidirect product -------------------------------------------


@dataclass(frozen=True)
class SemidirectElement:
    angle: Turn
    flip: bool = False

    def __init__(self, angle=0, flip: bool = False):
        object.__setattr__(self, "angle", angle if isinstance(angle, Turn) else Turn(frac(angle)))
        object.__setattr__(self, "flip", bool(flip))

    def __str__(self):
        return f"({self.angle}, {'flip' if self.flip else 'id'})"


def semidirect_mul(a: SemidirectElement, b: SemidirectElement) -> SemidirectElement:
    """(x, e)(x', e') = (x + (-1)^e x', e xor e')."""
    return SemidirectElement(a.angle + (-b.angle if a.flip else b.angle), a.flip != b.flip)


def semidirect_inverse(a: SemidirectElement) -> SemidirectElement:
    return SemidirectElement(a.angle if a.flip else -a.angle, a.flip)


def semidirect_conjugation_check(z, a) -> SemidirectElement:
    """Conjugate (a, flip) by (z, id); must equal (2z + a, flip)."""
    z = z if isinstance(z, Turn) else Turn(frac(z))
    a = a if isinstance(a, Turn) else Turn(frac(a))
    g = SemidirectElement(z)
    got = semidirect_mul(semidirect_mul(g, SemidirectElement(a, True)), semidirect_inverse(g))
    want = SemidirectElement(z * 2 + a, True)
    if got != want:
        raise ConjugationMismatch(f"{got} != {want}")
    return got


@dataclass(frozen=True)
class ProbeWitness:
    target: Turn
    z: Turn
    conjugate: SemidirectElement
    rotation: SemidirectElement


def semidirect_normal_closure_probe(a, targets: Sequence) -> list[ProbeWitness]:
    """Show each (b, flip) and each rotation (b - a, id) lies in the normal closure of (a, flip).

    z = (b - a)/2 solves 2z + a = b; then (b, flip)(a, flip) = (b - a, id).
    """
    a = a if isinstance(a, Turn) else Turn(frac(a))
    out = []
    for b in targets:
        b = b if isinstance(b, Turn) else Turn(frac(b))
        z = Turn((b - a).value / 2)
        conj = semidirect_conjugation_check(z, a)
        if conj != SemidirectElement(b, True):
            raise ConjugationMismatch(f"conjugate {conj} misses ({b}, flip)")
        rot = semidirect_mul(conj, SemidirectElement(a, True))
        if rot != SemidirectElement(b - a, False):
            raise ConjugationMismatch(f"rotation {rot} != ({b - a}, id)")
        out.append(ProbeWitness(b, z, conj, rot))
    return out


def grid_normal_closure(q: int, start: int | None = None) -> tuple[FiniteGroup, Subgroup]:
    """Normal closure of one flip element inside the (1/q)Z grid subgroup."""
    G = semidirect_grid_group(q)
    s = q if start is None else start
    return G, G.normal_closure([s])
