import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supercompact import spaces as sp
from supercompact import subbase as sb
from supercompact.circle import FULL, Arc, ArcSet, Turn, arc_within
from supercompact.groups import cyclic, fixture_groups
from supercompact.spaces import CIRCLE, Discrete, Product
from supercompact.textio import read_subbase

from oracles import arc_family_points, brute_binary, grid, interior_on_grid


def arc(s, ln):
    return ArcSet.of(Arc(Fraction(s), Fraction(ln)))


def circle_family(*members, closed=False):
    return sb.SubbaseFamily(CIRCLE, members, closed)


BAD_TRIPLE = (arc("0", "2/5"), arc("7/20", "2/5"), arc("7/10", "2/5"))

DEN = 8
small_arcs = st.builds(lambda s, l: arc(Fraction(s, DEN), Fraction(l, DEN)),
                       st.integers(0, DEN - 1), st.integers(0, DEN - 1))
arc_lists = st.lists(small_arcs, min_size=1, max_size=12, unique=True)


class TestLinked:
    def test_examples(self):
        assert sb.is_linked([arc(0, "3/10"), arc("1/4", "3/10"), arc("1/5", "1/5")])
        assert sb.is_linked([arc(0, "1/10")])
        assert not sb.is_linked([arc(0, "1/10"), arc("1/2", "1/10")])

    def test_space_mismatch(self):
        with pytest.raises(sp.SpaceMismatch):
            sb.is_linked([arc(0, "1/4"), frozenset({0})], CIRCLE)


class TestBinary:
    def test_short_arcs8(self, data_dir):
        F = read_subbase(data_dir / "short_arcs8.sb")
        assert len(F.members) == 25
        assert sb.is_binary(F) is True

    def test_stock_q8_matches_oracle(self):
        F = sb.stock_circle_family(8)
        # brute force over all 41 members is too slow; it covers the first 14
        assert sb.is_binary(F) is True
        assert brute_binary(arc_family_points(F.members[:14], DEN)) is True

    def test_bad_triple(self, data_dir):
        F = read_subbase(data_dir / "bad_arcs.sb")
        res = sb.is_binary(F)
        assert not res
        assert set(res.members) == set(BAD_TRIPLE)
        pts = arc_family_points(BAD_TRIPLE, 20)
        assert all(a & b for a in pts for b in pts) and not frozenset.intersection(*pts)

    def test_singletons(self):
        F = sb.SubbaseFamily(Discrete(5), [frozenset({x}) for x in range(5)])
        assert sb.is_binary(F) is True

    def test_budget(self):
        F = sb.stock_circle_family(24)
        with pytest.raises(sb.SearchBudgetExceeded):
            sb.is_binary(F, budget=2)

    def test_workers_agree(self):
        F = circle_family(*BAD_TRIPLE, arc(0, "1/8"), arc("1/2", "1/8"))
        assert not sb.is_binary(F, workers=2)
        assert sb.is_binary(sb.stock_circle_family(8), workers=2) is True

    @settings(max_examples=80, deadline=None)
    @given(arc_lists)
    def test_matches_brute_force(self, arcs):
        F = circle_family(*arcs)
        got = sb.is_binary(F)
        oracle = brute_binary(arc_family_points(F.members, DEN))
        assert (got is True) == (oracle is True)
        assert (sb.naive_binary_scan(F) is True) == (oracle is True)
        if got is not True:
            pts = arc_family_points(got.members, DEN)
            assert all(a & b for a in pts for b in pts) and not frozenset.intersection(*pts)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.frozensets(st.integers(0, 4), min_size=1), min_size=1, max_size=10, unique=True))
    def test_discrete_matches_brute_force(self, sets):
        F = sb.SubbaseFamily(Discrete(5), sets)
        assert (sb.is_binary(F) is True) == (brute_binary([frozenset(s) for s in F.members]) is True)

    def test_blocked_product(self):
        T2 = Product((CIRCLE, CIRCLE))
        F = sb.stock_family(T2, 8)
        assert F.blocks is not None and sb.is_binary(F) is True


class TestClosure:
    def test_example(self):
        F = sb.close_under_intersection(circle_family(arc(0, "3/10"), arc("1/4", "3/10")))
        assert set(F.members) == {arc(0, "3/10"), arc("1/4", "3/10"), arc("1/4", "1/20")}
        assert F.closed

    def test_disjoint_unchanged(self):
        F = sb.close_under_intersection(circle_family(arc(0, "1/8"), arc("1/2", "1/8")))
        assert len(F.members) == 2

    def test_already_closed(self):
        F = sb.stock_circle_family(8)
        assert sb.close_under_intersection(F.with_flag(False)).memberset == F.memberset

    def test_wrapping_pair(self):
        # two arcs meeting in two separate pieces give a two-component member
        F = sb.close_under_intersection(circle_family(arc(0, "3/4"), arc("1/2", "3/4")))
        two = [m for m in F.members if len(m) == 2]
        assert two == [ArcSet.of(Arc(0, Fraction(1, 4)), Arc(Fraction(1, 2), Fraction(1, 4)))]

    @settings(max_examples=50, deadline=None)
    @given(arc_lists)
    def test_closure_properties(self, arcs):
        F = circle_family(*arcs)
        C = sb.close_under_intersection(F)
        assert sb.check_intersection_closed(C)
        assert sb.close_under_intersection(C.with_flag(False)).memberset == C.memberset
        assert F.memberset <= C.memberset
        # every added member is an intersection of originals, checked on the grid
        pts = arc_family_points(F.members, DEN)
        for m in C.members:
            mp = arc_family_points([m], DEN)[0]
            holders = [p for p in pts if mp <= p]
            assert frozenset.intersection(*holders) == mp
        if sb.is_binary(F) is True:
            assert sb.is_binary(C) is True

    def test_not_closed_flagged(self):
        F = circle_family(arc(0, "3/10"), arc("1/4", "3/10"))
        assert not sb.check_intersection_closed(F)
        with pytest.raises(sb.NotIntersectionClosed):
            sb.subbase_criterion(F)


def criterion_oracle(members, q):
    """Every grid point and every grid neighbourhood, with the interior
    decided by sampling either side of the point."""
    for x in grid(q):
        for U in sb.grid_neighbourhoods(CIRCLE, Turn(x), q):
            inside = [m for m in members if m <= U]
            if not interior_on_grid(inside, x, q):
                return False
    return True


class TestCriterion:
    def test_short_arcs_q8(self):
        assert sb.subbase_criterion(sb.stock_circle_family(8), 8) is True

    def test_singletons(self):
        assert sb.subbase_criterion(sb.stock_finite_family(Discrete(6)), 24) is True

    def test_full_only(self):
        res = sb.subbase_criterion(circle_family(FULL, closed=True), 24)
        assert not res and res.x == Turn(0)

    def test_product(self):
        T2 = Product((CIRCLE, CIRCLE))
        assert sb.subbase_criterion(sb.stock_family(T2, 8), 8) is True
        mixed = Product((Discrete.of_group(cyclic(2)), CIRCLE))
        assert sb.subbase_criterion(sb.stock_family(mixed, 8), 8) is True

    def test_coarse_family_fails_fine_grid(self):
        # quarter arcs close up to eighths, which fit; half arcs only close up to quarters
        F = sb.close_under_intersection(circle_family(*[arc(Fraction(j, 8), "1/4") for j in range(8)]))
        assert sb.subbase_criterion(F, 8) is True  # the closure adds the shorter pieces
        G = circle_family(*[arc(Fraction(j, 4), "1/2") for j in range(4)])
        G = sb.close_under_intersection(G)
        assert not sb.subbase_criterion(G, 8)

    @settings(max_examples=40, deadline=None)
    @given(arc_lists)
    def test_minimal_neighbourhood_suffices(self, arcs):
        C = sb.close_under_intersection(circle_family(*arcs))
        assert (sb.subbase_criterion(C, DEN) is True) == criterion_oracle(C.members, DEN)


class TestStarRefinement:
    def test_four_arcs(self):
        U = sb.Cover(CIRCLE, [arc(Fraction(j, 4), "3/8") for j in range(4)])
        assert sb.lebesgue_number(U) == Fraction(1, 8)
        V = sb.star_refine(U)
        assert len(V) == 48
        assert all(m.measure() == Fraction(1, 24) for m in V.members)
        assert sb.star_condition_holds(U, V)

    def test_full(self):
        U = sb.Cover(CIRCLE, [FULL])
        assert sb.star_refine(U) is U

    def test_two_arcs(self):
        U = sb.Cover(CIRCLE, [arc(0, "2/3"), arc("1/2", "2/3")])
        assert sb.lebesgue_number(U) == Fraction(1, 6)
        assert sb.star_condition_holds(U, sb.star_refine(U))

    def test_not_a_cover(self):
        with pytest.raises(sb.NotACover):
            sb.Cover(CIRCLE, [arc(0, "1/4"), arc("1/2", "1/4")])

    def test_lebesgue_oracle(self):
        # brute force: the largest d on the 1/240 grid with every arc of length d inside a member;
        # starts on the finer 1/480 grid so they fall strictly inside the uncovered gaps
        U = sb.Cover(CIRCLE, [arc(0, "2/3"), arc("1/2", "2/3")])
        den = 240
        best = 0
        for k in range(1, den):
            d = Fraction(k, den)
            if all(any(arc_within(Arc(s, d), m.components[0]) for m in U.members)
                   for s in grid(2 * den)):
                best = d
        assert best == sb.lebesgue_number(U)

    def test_discrete_and_product(self):
        D = Discrete(4)
        U = sb.Cover(D, [frozenset({0, 1}), frozenset({1, 2, 3})])
        V = sb.star_refine(U)
        assert set(V.members) == {frozenset({x}) for x in range(4)}
        P = sb.Cover.product([U, sb.Cover(CIRCLE, [arc(0, "2/3"), arc("1/2", "2/3")])])
        W = sb.star_refine(P)
        assert W.factors is not None and len(W.factors) == 2

    def test_random_covers(self):
        rng = random.Random(7)
        for _ in range(10):
            U = sb.random_arc_cover(rng)
            assert sb.star_condition_holds(U, sb.star_refine(U))


class TestRestrict:
    def test_theorem(self):
        B = sb.stock_circle_family(8)
        U = sb.Cover(CIRCLE, [arc(Fraction(j, 8), "3/8") for j in range(8)])
        R = sb.restrict_to_cover(B, U)
        assert 0 < len(R.members) < len(B.members) and FULL not in R
        assert sb.is_binary(R) is True
        assert sb.check_intersection_closed(R)
        assert sb.subbase_criterion(R, 8) is True

    def test_full_cover(self):
        B = sb.stock_circle_family(8)
        assert sb.restrict_to_cover(B, sb.Cover(CIRCLE, [FULL])).memberset == B.memberset

    def test_singletons(self):
        D = Discrete(5)
        B = sb.SubbaseFamily(D, [frozenset({x}) for x in range(5)], closed=True)
        U = sb.Cover(D, [frozenset({0, 1, 2}), frozenset({2, 3, 4})])
        assert sb.restrict_to_cover(B, U).memberset == B.memberset


class TestTranslation:
    def test_stock_q8(self):
        assert sb.is_translation_invariant(sb.stock_circle_family(8), grid_turns(8))

    def test_single_arc(self):
        assert not sb.is_translation_invariant(circle_family(arc(0, "1/4")), [Turn(Fraction(1, 8))])

    @pytest.mark.parametrize("G", fixture_groups(16), ids=lambda G: G.name)
    def test_singletons(self, G):
        D = Discrete.of_group(G)
        F = sb.SubbaseFamily(D, [frozenset({x}) for x in range(G.order)])
        assert sb.is_translation_invariant(F, range(G.order))

    def test_no_group(self):
        with pytest.raises(sp.NoGroupStructure):
            sb.is_translation_invariant(sb.stock_finite_family(Discrete(3)), [1])


def grid_turns(q):
    return [Turn(x) for x in grid(q)]
