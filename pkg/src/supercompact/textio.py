"""Plain-text input formats.

All formats are line based; ``#`` starts a comment and blank lines are
ignored. File references inside a file are resolved relative to it.

group file::

    group 4
    0 1 2 3
    1 2 3 0
    ...

subgroup line: ``sub 0,2``. Homomorphism file: one line of codomain
indices, one per domain element.

closed sets (one per line)::

    set 0,2
    arc 1/4 1/8 + arc 3/4 0
    full
    box [ set 1 ; arc 0 1/4 ]

A subbase file may start with ``space circle``, ``space discrete <n>``,
``space group <file>`` or ``space product <a> x <b> ...``.

presentation file::

    pres m=2
    finite z2.grp
    gen 1/2 1/2 0

sequence file::

    stage point
    map drop 0
    stage circle
    map pow 2
    stage circle
"""

from __future__ import annotations

import re
from pathlib import Path

from . import invseq as iv
from . import spaces as sp
from .circle import Arc, ArcSet, frac
from .groups import FiniteGroup, GroupHom, Subgroup, cyclic, validate_group
from .presentations import Presentation
from .spaces import CIRCLE, POINT, Circle, Discrete, Product, Space
from .subbase import Cover, SubbaseFamily


class ParseError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


def _lines(path) -> list[tuple[int, str]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from exc
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _int(tok: str, path, no) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", path, no) from None


def _rational(tok: str, path, no):
    try:
        return frac(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a rational p/q, got {tok!r}", path, no) from None


# -- groups ------------------------------------------------------------------------


_group_cache: dict = {}


def read_group(path) -> FiniteGroup:
    path = Path(path).resolve()
    if path in _group_cache:
        return _group_cache[path]
    lines = _lines(path)
    if not lines:
        raise ParseError("empty group file", path)
    no, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "group":
        raise ParseError("first line must be 'group <n>'", path, no)
    n = _int(parts[1], path, no)
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} table rows, found {len(rows)}", path)
    table = []
    for no, line in rows:
        row = [_int(t, path, no) for t in line.split()]
        if len(row) != n:
            raise ParseError(f"row has {len(row)} entries, expected {n}", path, no)
        if any(not 0 <= v < n for v in row):
            raise ParseError("table entry out of range", path, no)
        table.append(row)
    G = validate_group(table, path.stem)
    _group_cache[path] = G
    return G


def format_group(G: FiniteGroup) -> str:
    return f"group {G.order}\n" + "".join(" ".join(map(str, row)) + "\n" for row in G.table)


def parse_subgroup(line: str, G: FiniteGroup, path=None, no=None) -> Subgroup:
    parts = line.split(None, 1)
    if not parts or parts[0] != "sub":
        raise ParseError("subgroup lines look like 'sub 0,2'", path, no)
    elems = [_int(t, path, no) for t in parts[1].replace(",", " ").split()] if len(parts) > 1 else []
    if any(not 0 <= x < G.order for x in elems):
        raise ParseError("subgroup element out of range", path, no)
    H = Subgroup(G, tuple(sorted(set(elems))))
    return H


def read_subgroups(path, G: FiniteGroup) -> list[Subgroup]:
    return [parse_subgroup(line, G, path, no) for no, line in _lines(path)]


def read_hom(path, domain: FiniteGroup, codomain: FiniteGroup) -> GroupHom:
    lines = _lines(path)
    if len(lines) != 1:
        raise ParseError("a homomorphism file holds one line of indices", path)
    no, line = lines[0]
    vals = [_int(t, path, no) for t in line.split()]
    if len(vals) != domain.order:
        raise ParseError(f"expected {domain.order} images, found {len(vals)}", path, no)
    if any(not 0 <= v < codomain.order for v in vals):
        raise ParseError("image index out of range", path, no)
    f = GroupHom(domain, codomain, tuple(vals))
    if not f.is_homomorphism():
        raise ParseError("map is not a homomorphism", path, no)
    return f


# -- closed sets ----------------------------------------------------------------------


def parse_arcset(text: str, path=None, no=None) -> ArcSet:
    text = text.strip()
    if text == "empty":
        raise ParseError("the empty set is not a closed-set member", path, no)
    arcs = []
    for piece in text.split("+"):
        toks = piece.split()
        if toks == ["full"]:
            arcs.append(Arc.full())
        elif len(toks) == 3 and toks[0] == "arc":
            start, length = _rational(toks[1], path, no), _rational(toks[2], path, no)
            if not 0 <= length <= 1:
                raise ParseError("arc length must lie in [0, 1]", path, no)
            arcs.append(Arc(start, length))
        else:
            raise ParseError(f"cannot read arc {piece.strip()!r}", path, no)
    return ArcSet(arcs)


def parse_body(text: str, space: Space | None, path=None, no=None):
    """One closed set; returns (space, body), inferring the space when None."""
    text = text.strip()
    if text.startswith("box"):
        m = re.fullmatch(r"box\s*\[(.*)\]", text)
        if not m:
            raise ParseError("boxes look like 'box [ a ; b ]'", path, no)
        parts = [p.strip() for p in m.group(1).split(";")]
        if space is not None and (not isinstance(space, Product) or len(space.factors) != len(parts)):
            raise ParseError(f"box does not match {space}", path, no)
        got = [parse_body(p, space.factors[i] if space else None, path, no) for i, p in enumerate(parts)]
        return Product(tuple(s for s, _ in got)) if space is None else space, tuple(b for _, b in got)
    if text.startswith("set"):
        toks = text[3:].replace(",", " ").split()
        if not toks:
            raise ParseError("the empty set is not a closed-set member", path, no)
        pts = frozenset(_int(t, path, no) for t in toks)
        if space is None:
            space = Discrete(max(pts) + 1)
        if not isinstance(space, Discrete) or any(not 0 <= x < space.size for x in pts):
            raise ParseError(f"point set does not fit {space}", path, no)
        return space, pts
    body = parse_arcset(text, path, no)
    if space is not None and not isinstance(space, Circle):
        raise ParseError(f"arc set does not fit {space}", path, no)
    return CIRCLE, body


def parse_space(text: str, base: Path | None = None, path=None, no=None) -> Space:
    text = text.strip()
    if text == "circle":
        return CIRCLE
    if text == "point":
        return POINT
    toks = text.split(None, 1)
    if toks[0] == "discrete" and len(toks) == 2:
        arg = toks[1].strip()
        if arg.isdigit():
            return Discrete(int(arg))
        return Discrete.of_group(read_group(_resolve(arg, base)))
    if toks[0] == "group" and len(toks) == 2:
        return Discrete.of_group(read_group(_resolve(toks[1].strip(), base)))
    if toks[0] == "product" and len(toks) == 2:
        return Product(tuple(parse_space(p, base, path, no) for p in re.split(r"\s+x\s+", toks[1])))
    raise ParseError(f"unknown space {text!r}", path, no)


def _resolve(name: str, base: Path | None) -> Path:
    p = Path(name)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p


def _widen(a: Space, b: Space) -> Space:
    if isinstance(a, Discrete) and isinstance(b, Discrete):
        return a if a.size >= b.size else b
    if isinstance(a, Product) and isinstance(b, Product) and len(a.factors) == len(b.factors):
        return Product(tuple(_widen(x, y) for x, y in zip(a.factors, b.factors)))
    if a == b:
        return a
    raise sp.SpaceMismatch(f"{a} and {b} differ")


def read_subbase(path, closed: bool = False) -> SubbaseFamily:
    path = Path(path)
    lines = _lines(path)
    space = None
    if lines and lines[0][1].startswith("space "):
        no, line = lines[0]
        space = parse_space(line[6:], path.parent, path, no)
        lines = lines[1:]
    if not lines:
        raise ParseError("no members", path)
    bodies = []
    inferred = space
    for no, line in lines:
        s, body = parse_body(line, space, path, no)
        if space is None:
            try:
                inferred = s if inferred is None else _widen(inferred, s)
            except sp.SpaceMismatch as exc:
                raise ParseError(str(exc), path, no) from None
        bodies.append(body)
    return SubbaseFamily(inferred, bodies, closed)


def read_cover(path, space: Space | None = None) -> Cover:
    F = read_subbase(path)
    return Cover(space or F.space, F.members)


def format_family(F: SubbaseFamily) -> str:
    members = sorted(F.members, key=lambda b: sp.sort_key(F.space, b))
    return "".join(sp.format_body(F.space, b) + "\n" for b in members)


# -- presentations and sequences -------------------------------------------------------------


def read_presentation(path) -> Presentation:
    path = Path(path)
    lines = _lines(path)
    if not lines:
        raise ParseError("empty presentation", path)
    no, head = lines[0]
    m = re.fullmatch(r"pres\s+m\s*=\s*(\d+)", head)
    if not m:
        raise ParseError("first line must be 'pres m=<m>'", path, no)
    rank = int(m.group(1))
    F = cyclic(1)
    gens = []
    for no, line in lines[1:]:
        toks = line.split()
        if toks[0] == "finite" and len(toks) == 2:
            F = read_group(_resolve(toks[1], path.parent))
        elif toks[0] == "gen":
            vals = toks[1:]
            if len(vals) == rank:
                turns, f = vals, 0
            elif len(vals) == rank + 1:
                turns, f = vals[:-1], _int(vals[-1], path, no)
            else:
                raise ParseError(f"generator needs {rank} turns and an optional finite index", path, no)
            gens.append((tuple(_rational(t, path, no) for t in turns), f))
        else:
            raise ParseError(f"unknown line {line!r}", path, no)
    try:
        return Presentation(rank, F, tuple(gens))
    except ValueError as exc:
        if type(exc) is ValueError:
            raise ParseError(str(exc), path) from None
        raise


def _parse_realization(text: str, source: Space, target: Space, base: Path, path, no):
    toks = text.split()
    if not toks:
        raise ParseError("empty map", path, no)
    kind = toks[0]
    if kind == "pow" and len(toks) == 2:
        return iv.CirclePower(_int(toks[1], path, no))
    if kind == "drop" and len(toks) == 2:
        return iv.DropFactor(_int(toks[1], path, no))
    if kind == "id" and len(toks) == 1:
        if not isinstance(source, Discrete) or source.group is None:
            return iv.CirclePower(1)
        return iv.FiniteHom(GroupHom.identity(source.group))
    if kind == "hom" and len(toks) == 2:
        if not (isinstance(source, Discrete) and isinstance(target, Discrete)) or source.group is None or target.group is None:
            raise ParseError("hom maps need group stages on both sides", path, no)
        return iv.FiniteHom(read_hom(_resolve(toks[1], base), source.group, target.group))
    if kind == "factors":
        if not (isinstance(source, Product) and isinstance(target, Product)):
            raise ParseError("factors maps need product stages", path, no)
        parts = [p.strip() for p in text[len("factors"):].split(";")]
        if len(parts) != len(source.factors):
            raise ParseError("one part per factor is needed", path, no)
        return iv.Factorwise(tuple(
            _parse_realization(p, s, t, base, path, no) for p, s, t in zip(parts, source.factors, target.factors)
        ))
    raise ParseError(f"unknown map {text!r}", path, no)


def read_sequence(path) -> iv.InverseSeq:
    path = Path(path)
    stages, labels, pending = [], [], []
    for no, line in _lines(path):
        kind, _, rest = line.partition(" ")
        if kind == "stage":
            stages.append(parse_space(rest, path.parent, path, no))
            labels.append(rest.strip())
        elif kind == "map":
            pending.append((len(stages), rest, no))
        else:
            raise ParseError(f"unknown line {line!r}", path, no)
    if not stages:
        raise ParseError("no stages", path)
    if len(pending) != len(stages) - 1 or any(at != i + 1 for i, (at, _, _) in enumerate(pending)):
        raise ParseError("write exactly one map line between consecutive stages", path)
    maps = []
    for i, (_, text, no) in enumerate(pending):
        src, tgt = stages[i + 1], stages[i]
        real = _parse_realization(text, src, tgt, path.parent, path, no)
        try:
            maps.append(iv.BondingMap(src, tgt, real))
        except iv.InvalidSequence as exc:
            raise ParseError(str(exc), path, no) from None
    try:
        return iv.InverseSeq(tuple(stages), tuple(maps), labels=tuple(labels))
    except iv.NotSurjective:
        raise
    except iv.InvalidSequence as exc:
        raise ParseError(str(exc), path) from None
