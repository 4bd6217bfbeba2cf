"""Acceptance criteria 1-8.

Each test records (passed, detail) in conftest.ACCEPTANCE; the terminal
summary prints one line per criterion.
"""

import random
import time
from fractions import Fraction

from supercompact import extend as ex
from supercompact import invseq as iv
from supercompact import presentations as pr
from supercompact import subbase as sb
from supercompact.circle import Arc, ArcSet, Turn
from supercompact.groups import (
    HypothesisUnmet,
    box1_hypotheses,
    check_box1,
    check_giot_finite,
    cyclic,
    direct_product,
    fixture_groups,
    is_simple,
    normal_triples,
    quotient,
    symmetric,
)
from supercompact.presentations import Presentation, SemidirectElement
from supercompact.spaces import CIRCLE, Discrete

from conftest import ACCEPTANCE


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    assert ok, detail


def arc_mask(start, length, den):
    return sum(1 << ((start + j) % den) for j in range(length + 1))


def linked_families_without_meet(masks, max_size):
    """Count linked subfamilies (size 1..max_size) and list those with empty meet.

    Two closed arcs with endpoints in (1/den)Z meet iff they share a grid
    point, so bitmasks over the grid decide everything.
    """
    n = len(masks)
    adj = [[j for j in range(i + 1, n) if masks[i] & masks[j]] for i in range(n)]
    count, bad = 0, []
    stack = [((i,), masks[i], adj[i]) for i in range(n)]
    while stack:
        fam, meet, cand = stack.pop()
        count += 1
        if not meet:
            bad.append(fam)
        if len(fam) == max_size:
            continue
        for j in cand:
            if all(masks[j] & masks[i] for i in fam):
                stack.append((fam + (j,), meet & masks[j], [k for k in adj[j] if k in cand]))
    return count, bad


def test_criterion_1_arc_helly():
    den = 16
    t0 = time.perf_counter()
    specs = [(s, l) for s in range(den) for l in range(den // 4 + 1)]
    count, bad = linked_families_without_meet([arc_mask(s, l, den) for s, l in specs], 5)
    family = sb.SubbaseFamily(CIRCLE, [ArcSet.of(Arc(Fraction(s, den), Fraction(l, den))) for s, l in specs])
    whole = sb.is_binary(family)
    triple = sb.SubbaseFamily(CIRCLE, [ArcSet.of(Arc(Fraction(s, 20), Fraction(2, 5))) for s in (0, 7, 14)])
    neg = sb.is_binary(triple)
    elapsed = time.perf_counter() - t0
    ok = not bad and whole is True and not neg and set(neg.members) == set(triple.members) and elapsed <= 60
    record(1, ok, f"{len(specs)} arcs, {count} linked families of <= 5, {len(bad)} counterexamples, "
                  f"negative control witness size {len(neg.members) if not neg else 0}, {elapsed:.2f}s")


def test_criterion_2_product_lemma_sweep():
    t0 = time.perf_counter()
    z2 = cyclic(2)
    fixtures = [cyclic(n) for n in range(1, 7)] + [direct_product(z2, z2), symmetric(3)]
    pairs = subgroups = satisfied = failures = 0
    for N in fixtures:
        for L in fixtures:
            P = direct_product(N, L)
            pairs += 1
            for G in P.subgroups():
                subgroups += 1
                # independent hypothesis check through the coordinate pairs
                coords = [divmod(x, L.order) for x in G.elements]
                onto_N = {a for a, _ in coords} == set(range(N.order))
                fibre = {b for a, b in coords if a == 0} == set(range(L.order))
                assert box1_hypotheses(N, L, G) == (onto_N and fibre)
                if onto_N and fibre:
                    satisfied += 1
                    if not check_box1(N, L, G):
                        failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and satisfied == pairs and elapsed <= 30
    record(2, ok, f"{pairs} pairs, {subgroups} subgroups, {satisfied} satisfy the hypotheses, "
                  f"{failures} counterexamples, {elapsed:.2f}s")


def test_criterion_3_finite_product_decomposition():
    triples = applicable = failures = 0
    for G in fixture_groups(16):
        for A, B, C in normal_triples(G):
            triples += 1
            GC, _ = quotient(G, C)
            if GC.order == 1 or not is_simple(GC):
                continue
            try:
                ok = check_giot_finite(G, A, B, C)
            except HypothesisUnmet:
                continue
            applicable += 1
            # sizes must also agree: |G/B| = |G/A| |G/C|
            if not ok or G.order // B.order != (G.order // A.order) * (G.order // C.order):
                failures += 1
    record(3, failures == 0 and applicable > 0,
           f"{triples} normal triples, {applicable} with simple G/C and AC = G, {failures} failures")


def test_criterion_4_decomposition_certificate():
    P = Presentation.torus(2, ("1/2", "1/2"))
    steps = [str(s) for s in pr.decompose_presentation(P)]
    tq = pr.torus_quotient(2, [t for t, _ in P.subgroup_elements()])
    rep = pr.verify_torus_witnesses(tq, 8)
    want = ["FiniteKernel(2)", "ProductBySimple(T)", "ProductBySimple(T)"]
    record(4, steps == want and rep.ok and rep.grid == 8,
           f"steps {steps}; {sum(ok for _, ok in rep.checks)}/{len(rep.checks)} witness checks on the 1/8 grid")


PIPELINES = [
    ("Z8 tower", lambda: cyclic(8)),
    ("T^2", lambda: Presentation.torus(2)),
    ("solenoid(2,3)", lambda: iv.solenoid_sequence(2, 3)),
    ("(T^2)/diag", lambda: Presentation.torus(2, ("1/2", "1/2"))),
]


def test_criterion_5_pipelines():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, make in PIPELINES:
        F, rep = ex.mills_pipeline(make(), resolution=24, budget=22)
        stage_ok = all(s.preimage_containment and s.binary is True and s.criterion is True for s in rep.stages)
        final = sb.is_binary(F, 22) is True and sb.subbase_criterion(F, 24) is True
        ok &= rep.ok and stage_ok and final
        parts.append(f"{name}: {len(F.members)} members {'ok' if stage_ok and final else 'FAIL'}")
    elapsed = time.perf_counter() - t0
    record(5, ok and elapsed <= 300, "; ".join(parts) + f"; {elapsed:.1f}s")


def star_ok(U, V):
    """Independent star check on (start, length) pairs of Fractions."""
    arcs = [(m.components[0].start.value, m.components[0].length) for m in V.members]
    cover = [(m.components[0].start.value, m.components[0].length) for m in U.members]

    def meet(a, b):
        return (b[0] - a[0]) % 1 <= a[1] or (a[0] - b[0]) % 1 <= b[1]

    for W in arcs:
        # touching arcs as (offset from W in (-1/2, 1/2], length)
        near = []
        for X in arcs:
            if meet(W, X):
                d = (X[0] - W[0]) % 1
                near.append((d - 1 if d > Fraction(1, 2) else d, X[1]))
        lo = min(d for d, _ in near)
        hi = max(d + ln for d, ln in near)
        start, length = (W[0] + lo) % 1, hi - lo
        if not any((start - u[0]) % 1 + length <= u[1] for u in cover):
            return False
    return True


def test_criterion_6_star_refinement():
    rng = random.Random(20240601)
    good = aborts = 0
    for _ in range(20):
        U = sb.random_arc_cover(rng)
        try:
            V = sb.star_refine(U)
        except sb.StarRefinementFailed:
            aborts += 1
            continue
        good += star_ok(U, V) and sb.star_condition_holds(U, V)
    record(6, good == 20 and aborts == 0, f"{good}/20 covers refined with verified stars, {aborts} aborts")


def test_criterion_7_semidirect_probes():
    rng = random.Random(20240601)
    mismatches = 0
    for _ in range(1000):
        z = Fraction(rng.randrange(10_000), rng.randint(1, 10_000))
        a = Fraction(rng.randrange(10_000), rng.randint(1, 10_000))
        got = pr.semidirect_conjugation_check(z, a)
        mismatches += got != SemidirectElement(2 * z + a, True)
    q = 9
    whole = 0
    for flip in range(q, 2 * q):
        G, N = pr.grid_normal_closure(q, flip)
        whole += N.order == G.order == 2 * q
    record(7, mismatches == 0 and whole == q,
           f"1000 conjugations, {mismatches} mismatches; closure is the whole 1/9 grid group from {whole}/{q} flips")


def test_criterion_8_translation_invariance():
    q = 24
    circle_ok = sb.is_translation_invariant(sb.stock_circle_family(q), [Turn(Fraction(k, q)) for k in range(q)])
    groups = fixture_groups(16)
    finite_ok = 0
    for G in groups:
        D = Discrete.of_group(G)
        singles = sb.SubbaseFamily(D, [frozenset({x}) for x in range(G.order)])
        finite_ok += sb.is_translation_invariant(singles, range(G.order)) and \
            sb.is_translation_invariant(sb.stock_finite_family(D), range(G.order))
    record(8, circle_ok and finite_ok == len(groups),
           f"stock circle family {'invariant' if circle_ok else 'NOT invariant'} under 24 rotations; "
           f"{finite_ok}/{len(groups)} fixture groups")
