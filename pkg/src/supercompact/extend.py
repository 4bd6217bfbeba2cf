"""Pushing a binary closed subbase up an inverse sequence.

Each successor map is handled by one of two constructions:

* local homeomorphism (finite-kernel map f): keep the full preimages
  f^-1(A) and add the small pieces B with f(B) in the family and B inside a
  member of a star refinement of a cover on which f is injective;
* product (projection K x X -> K): take all boxes A x B with B from a
  binary family on the new factor X.

Every stage records whether the old family pulls back into the new one,
and, when asked, whether the new family is binary and passes the
neighbourhood criterion at the chosen resolution.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import invseq as iv
from . import spaces as sp
from . import subbase as sb
from .circle import Arc, ArcSet, PowerMap, arc_within
from .groups import FiniteGroup
from .presentations import Presentation, build_sequence
from .spaces import Product, Space
from .subbase import Cover, SubbaseFamily


class Case(enum.Enum):
    LOCAL_HOMEO = "LocalHomeo"
    PRODUCT = "Product"
    # accumulated preimages at a limit stage; finite sequences never need it
    LIMIT_UNION = "LimitUnion"

    def __str__(self):
        return self.value


class MissingFullSpaceMember(ValueError):
    pass


class CoverNotInjective(ValueError):
    def __init__(self, member, pair):
        self.member = member
        self.pair = pair
        super().__init__(f"map is not injective on cover member {member}: {pair[0]} and {pair[1]} collide")


class VerificationFailed(RuntimeError):
    def __init__(self, report: ExtensionReport, stage: int | None = None):
        self.report = report
        self.stage = stage
        where = f" at stage {stage}" if stage is not None else ""
        super().__init__(f"extension verification failed{where}")


# -- reports ----------------------------------------------------------------------


@dataclass
class StageRecord:
    index: int
    label: str
    case: Case
    map: str
    input_size: int
    output_size: int
    closure_added: int = 0
    preimage_containment: bool = True
    containment_witness: object = None
    linked_pairs: bool | None = None
    linked_pair_witness: object = None
    binary: object = None
    criterion: object = None
    resolution: int = 24

    @property
    def ok(self) -> bool:
        return (
            self.preimage_containment
            and self.linked_pairs is not False
            and self.binary is not False and not isinstance(self.binary, sb.Counterexample)
            and self.criterion is not False and not isinstance(self.criterion, sb.CriterionFailure)
        )

    def lines(self) -> list[str]:
        out = [
            f"stage {self.index}: {self.label}",
            f"  case: {self.case}",
            f"  map: {self.map}",
            f"  input members: {self.input_size}",
            f"  output members: {self.output_size}",
            f"  closure added: {self.closure_added}",
            f"  preimage containment: {_flag(self.preimage_containment)}",
        ]
        if self.containment_witness is not None:
            out.append(f"    missing preimage of: {self.containment_witness}")
        out.append(f"  linked pairs inside a cover member: {_flag(self.linked_pairs)}")
        if self.linked_pair_witness is not None:
            out.append(f"    witness pair: {self.linked_pair_witness}")
        out.append(f"  binary: {_outcome(self.binary)}")
        if isinstance(self.binary, sb.Counterexample):
            out += [f"    linked, empty meet: {m}" for m in self.binary.members]
        out.append(f"  criterion (q={self.resolution}): {_outcome(self.criterion)}")
        if isinstance(self.criterion, sb.CriterionFailure):
            out.append(f"    point {self.criterion.x}, neighbourhood {self.criterion.U}")
        return out


def _flag(v) -> str:
    if v is None:
        return "n/a"
    return "pass" if v else "FAIL"


def _outcome(v) -> str:
    if v is None:
        return "skipped"
    if v is True:
        return "pass"
    return "FAIL"


@dataclass
class ExtensionReport:
    stages: list = field(default_factory=list)
    resolution: int = 24
    base_size: int = 0

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.stages)

    @property
    def cases(self) -> list[Case]:
        return [s.case for s in self.stages]

    def text(self) -> str:
        lines = ["extension report", f"resolution: {self.resolution}", f"base members: {self.base_size}"]
        for s in self.stages:
            lines += s.lines()
        lines.append(f"result: {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.text()


# -- Case 2: products -----------------------------------------------------------------


def extend_product(A: SubbaseFamily, B: SubbaseFamily) -> SubbaseFamily:
    """All boxes A x B; the family on K x X extending A along the projection."""
    K, X = A.space, B.space
    if isinstance(X, Product):
        raise TypeError("the new factor must be a circle or a finite space")
    if sp.full_set(X) not in B:
        raise MissingFullSpaceMember(f"the family on {X} must contain the whole space")
    if sp.is_point(K):
        return B.with_flag(B.closed and A.closed)
    if sp.full_set(K) not in A:
        raise MissingFullSpaceMember(f"the family on {K} must contain the whole space")
    space = sp.extend_space(K, X)
    if A.blocks is not None:
        blocks = [b + (B.members,) for b in A.blocks]
    elif isinstance(K, Product):
        blocks = [tuple((x,) for x in box) + (B.members,) for box in A.members]
    else:
        blocks = [(A.members, B.members)]
    return SubbaseFamily(space, closed=A.closed and B.closed, blocks=blocks)


# -- Case 1: local homeomorphisms ---------------------------------------------------------


def default_cover(f: iv.BondingMap) -> Cover:
    """Arcs of length 1/(2n) centred on the 1/(4n) grid for x -> n x; singletons for a finite map."""
    r = f.realization
    if isinstance(r, iv.CirclePower):
        n = r.n
        step = Fraction(1, 4 * n)
        return Cover(sp.CIRCLE, [ArcSet.of(Arc(k * step - step, 2 * step)) for k in range(4 * n)])
    if isinstance(r, iv.FiniteHom):
        return Cover(f.source, [frozenset({x}) for x in range(f.source.size)])
    if isinstance(r, iv.Factorwise):
        return Cover.product([default_cover(iv.part_map(p)) for p in r.parts])
    raise TypeError(f"{r} is not a local homeomorphism")


def check_injective(f: iv.BondingMap, U: Cover) -> None:
    r = f.realization
    if isinstance(r, iv.Factorwise):
        if U.factors is None:
            raise TypeError("factorwise maps need a product cover")
        for p, c in zip(r.parts, U.factors):
            check_injective(iv.part_map(p), c)
        return
    for m in U.members:
        if isinstance(r, iv.CirclePower):
            for a in m.components:
                if a.is_full or a.length * r.n >= 1:
                    second = a.start + sp.Turn(Fraction(1, r.n))
                    raise CoverNotInjective(m, (a.start, second))
        elif isinstance(r, iv.FiniteHom):
            seen = {}
            for x in sorted(m):
                y = r.hom(x)
                if y in seen:
                    raise CoverNotInjective(m, (seen[y], x))
                seen[y] = x
        else:
            raise TypeError(f"{r} is not a local homeomorphism")


def _hull(body: ArcSet) -> Arc | None:
    """The shortest arc containing ``body`` (None for the full circle)."""
    if body.is_full:
        return None
    comps = body.components
    if len(comps) == 1:
        return comps[0]
    best_gap, best_i = Fraction(-1), 0
    for i, a in enumerate(comps):
        nxt = comps[(i + 1) % len(comps)]
        gap = (nxt.start - a.end).value
        if gap > best_gap:
            best_gap, best_i = gap, i
    start = comps[(best_i + 1) % len(comps)].start
    return Arc(start, 1 - best_gap)


def _pieces_in_cover(f: iv.BondingMap, members: Sequence, V: Cover) -> list:
    """Every B inside a member W of V with f(B) a member: B = f^-1(A) & W for A inside f(W)."""
    r = f.realization
    out = {}
    if isinstance(r, iv.FiniteHom):
        for W in V.members:
            image = frozenset(r.hom(x) for x in W)
            for A in members:
                if A <= image:
                    B = frozenset(x for x in W if r.hom(x) in A)
                    out.setdefault(B, None)
        return list(out)
    P = PowerMap(r.n)
    hulls = [(A, _hull(A)) for A in members]
    pre_cache: dict = {}
    for W in V.members:
        w = W.components[0]
        image = P.image_arc(w)
        for A, h in hulls:
            if h is None or h.length > image.length or not arc_within(h, image):
                continue
            if A not in pre_cache:
                pre_cache[A] = f.preimage(A)
            B = pre_cache[A] & W
            if B:
                out.setdefault(B, None)
    return list(out)


@dataclass
class LocalHomeoParts:
    preimages: list
    pieces: list
    refinement: Cover


def _local_parts(f: iv.BondingMap, members: Sequence, U: Cover) -> LocalHomeoParts:
    V = sb.star_refine(U)
    pre = list(dict.fromkeys(f.preimage(A) for A in members))
    pieces = _pieces_in_cover(f, members, V)
    return LocalHomeoParts(pre, pieces, V)


def linked_pair_check(space: Space, pieces: Sequence, U: Cover):
    """Each linked pair of pieces should fit together inside one member of U.

    Returns None when it holds, else the offending pair.
    """
    if not pieces:
        return None
    arr, masks = sp.member_masks(space, pieces)
    for i in range(len(pieces)):
        for j in range(i, len(pieces)):
            if masks[i] & masks[j]:
                union = sp.union(space, [pieces[i], pieces[j]])
                if U.holder(union) is None:
                    return pieces[i], pieces[j]
    return None


@dataclass
class LocalHomeoResult:
    family: SubbaseFamily
    closure_added: int
    linked_pairs: bool
    linked_pair_witness: object
    refinement: Cover


def extend_local_homeo_detailed(f: iv.BondingMap, A: SubbaseFamily, U: Cover | None = None) -> LocalHomeoResult:
    if A.space != f.target:
        raise sp.SpaceMismatch("family does not live on the target of the map")
    U = U or default_cover(f)
    check_injective(f, U)
    r = f.realization
    if isinstance(r, iv.Factorwise):
        return _extend_factorwise(f, A, U)
    parts = _local_parts(f, A.members, U)
    raw = SubbaseFamily(f.source, parts.preimages + parts.pieces)
    closed = sb.close_under_intersection(raw)
    witness = linked_pair_check(f.source, parts.pieces, U)
    return LocalHomeoResult(closed, len(closed.members) - len(raw.members), witness is None, witness, parts.refinement)


def _extend_factorwise(f: iv.BondingMap, A: SubbaseFamily, U: Cover) -> LocalHomeoResult:
    space = f.source
    if A.blocks is None:
        blocks_in = [tuple((x,) for x in box) for box in A.members]
    else:
        blocks_in = A.blocks
    maps = [iv.part_map(p) for p in f.realization.parts]
    pre_blocks, piece_blocks = [], []
    per_factor_pieces = [dict() for _ in maps]
    cache: dict = {}
    for block in blocks_in:
        pre_parts, piece_parts = [], []
        for i, (g, part) in enumerate(zip(maps, block)):
            key = (i, part)
            if key not in cache:
                cache[key] = _local_parts(g, part, U.factors[i])
            lp = cache[key]
            pre_parts.append(lp.preimages)
            piece_parts.append(lp.pieces)
            for p in lp.pieces:
                per_factor_pieces[i].setdefault(p, None)
        pre_blocks.append(pre_parts)
        piece_blocks.append(piece_parts)
    raw = SubbaseFamily(space, blocks=pre_blocks + [b for b in piece_blocks if all(b)])
    closed = sb.close_under_intersection(raw)
    witness = None
    for i, g in enumerate(maps):
        w = linked_pair_check(g.source, list(per_factor_pieces[i]), U.factors[i])
        if w is not None:
            witness = (i, w)
            break
    refinement = Cover.product([sb.star_refine(c) for c in U.factors])
    return LocalHomeoResult(closed, len(closed.members) - len(raw.members), witness is None, witness, refinement)


def extend_local_homeo(
    f: iv.BondingMap,
    A: SubbaseFamily,
    U: Cover | None = None,
    resolution: int = 24,
    budget: int = 22,
    verify: bool = True,
    workers: int = 1,
) -> SubbaseFamily:
    """The family {f^-1 A} plus small injective pieces, closed under intersections."""
    res = extend_local_homeo_detailed(f, A, U)
    if verify:
        rec = _record(0, str(f.source), Case.LOCAL_HOMEO, f, A, res.family, res.closure_added, resolution)
        rec.linked_pairs, rec.linked_pair_witness = res.linked_pairs, res.linked_pair_witness
        _verify(rec, res.family, resolution, budget, workers)
        if not rec.ok:
            raise VerificationFailed(ExtensionReport([rec], resolution, len(A.members)))
    return res.family


# -- folding along a sequence -------------------------------------------------------------


def _dropped_factor(m: iv.BondingMap) -> Space:
    if sp.is_point(m.target):
        return m.source
    return m.source.factors[-1]


def preimage_containment(f: iv.BondingMap, A: SubbaseFamily, out: SubbaseFamily):
    """None when f^-1(A) lies in ``out`` for every member A, else the first miss."""
    r = f.realization
    if A.blocks is not None and isinstance(r, (iv.Factorwise, iv.DropFactor)):
        for block in A.blocks:
            if isinstance(r, iv.Factorwise):
                pre = tuple(
                    tuple(iv.part_map(p).preimage(x) for x in part) for p, part in zip(r.parts, block)
                )
            else:
                pre = tuple(block) + ((sp.full_set(out.space.factors[-1]),),)
            if not sb.family_contains_all(out, pre, blocked=True):
                for box in itertools.product(*block):
                    if f.preimage(box) not in out:
                        return box
        return None
    for a in A.members:
        if f.preimage(a) not in out:
            return a
    return None


def _record(index, label, case, f, A, out, added, resolution) -> StageRecord:
    miss = preimage_containment(f, A, out)
    return StageRecord(
        index=index,
        label=label,
        case=case,
        map=str(f),
        input_size=len(A.members),
        output_size=len(out.members),
        closure_added=added,
        preimage_containment=miss is None,
        containment_witness=None if miss is None else sp.format_body(A.space, miss),
        resolution=resolution,
    )


def _verify(rec: StageRecord, F: SubbaseFamily, resolution: int, budget: int, workers: int) -> None:
    rec.binary = sb.is_binary(F, budget, workers)
    rec.criterion = sb.subbase_criterion(F, resolution)


def extend_along(
    S: iv.InverseSeq,
    A0: SubbaseFamily,
    resolution: int = 24,
    budget: int = 22,
    workers: int = 1,
    covers: dict | None = None,
    verify_each: bool = True,
) -> tuple[SubbaseFamily, ExtensionReport]:
    """Fold the two constructions along S, stage by stage from the base.

    FiniteKernel maps use the local-homeomorphism construction with the
    default cover unless ``covers`` supplies one for that map index;
    ProductBySimple maps take products with the stock family of the new
    factor. Any failed check aborts with VerificationFailed.
    """
    if A0.space != S.stages[0]:
        raise sp.SpaceMismatch("the base family must live on stage 0")
    covers = covers or {}
    report = ExtensionReport(resolution=resolution, base_size=len(A0.members))
    A = A0 if A0.closed else sb.close_under_intersection(A0)
    last = len(S.maps) - 1
    for i, (f, tag) in enumerate(zip(S.maps, S.tags)):
        label = S.labels[i + 1]
        if tag is iv.Tag.FINITE_KERNEL:
            res = extend_local_homeo_detailed(f, A, covers.get(i))
            out = res.family
            rec = _record(i + 1, label, Case.LOCAL_HOMEO, f, A, out, res.closure_added, resolution)
            rec.linked_pairs, rec.linked_pair_witness = res.linked_pairs, res.linked_pair_witness
        else:
            B = sb.stock_family(_dropped_factor(f), resolution)
            out = extend_product(A, B)
            rec = _record(i + 1, label, Case.PRODUCT, f, A, out, 0, resolution)
        if verify_each or i == last:
            _verify(rec, out, resolution, budget, workers)
        report.stages.append(rec)
        if not rec.ok:
            raise VerificationFailed(report, i + 1)
        A = out
    return A, report


def base_family(space: Space, resolution: int = 24) -> SubbaseFamily:
    if sp.is_point(space):
        return sb.point_family()
    return sb.stock_family(space, resolution)


def mills_pipeline(
    P: Presentation | FiniteGroup | iv.InverseSeq,
    A0: SubbaseFamily | None = None,
    resolution: int = 24,
    budget: int = 22,
    workers: int = 1,
    verify_each: bool = True,
) -> tuple[SubbaseFamily, ExtensionReport]:
    """Build the sequence for P and push a binary family from its base to its top."""
    if isinstance(P, FiniteGroup):
        P = Presentation.finite(P)
    S = P if isinstance(P, iv.InverseSeq) else build_sequence(P)
    A0 = A0 or base_family(S.stages[0], resolution)
    return extend_along(S, A0, resolution, budget, workers, verify_each=verify_each)
