from itertools import product

import pytest

from supercompact.groups import (
    AxiomViolation,
    GroupHom,
    HypothesisUnmet,
    NotNormal,
    Subgroup,
    alternating,
    box1_hypotheses,
    check_box1,
    check_giot_finite,
    cyclic,
    dihedral,
    direct_product,
    find_isomorphism,
    fixture_groups,
    is_simple,
    kernel,
    normal_subgroups,
    quaternion,
    quotient,
    resolve_finite,
    symmetric,
    validate_group,
)

from oracles import cosets, is_normal, naive_closure, subgroups_by_small_generating_sets


def brute_axioms(table):
    n = len(table)
    assoc = all(table[table[a][b]][c] == table[a][table[b][c]] for a, b, c in product(range(n), repeat=3))
    ident = all(table[0][a] == a and table[a][0] == a for a in range(n))
    inv = all(any(table[a][b] == 0 and table[b][a] == 0 for b in range(n)) for a in range(n))
    return assoc and ident and inv


class TestValidate:
    def test_z4_accepted(self):
        G = validate_group([[(a + b) % 4 for b in range(4)] for a in range(4)])
        assert G.order == 4 and G.identity == 0

    def test_identity_row_rejected(self):
        # associative but 0 is not the identity: x*y = x+y+1 mod 3
        table = [[(a + b + 1) % 3 for b in range(3)] for a in range(3)]
        with pytest.raises(AxiomViolation) as e:
            validate_group(table)
        assert e.value.kind == "identity"

    def test_subtraction_mod_3_not_associative(self):
        table = [[(a - b) % 3 for b in range(3)] for a in range(3)]
        with pytest.raises(AxiomViolation) as e:
            validate_group(table)
        assert e.value.kind == "associativity"
        a, b, c = e.value.witness
        assert table[table[a][b]][c] != table[a][table[b][c]]

    def test_missing_inverse(self):
        # {0, 1} under max: identity 0, but 1 has no inverse
        with pytest.raises(AxiomViolation) as e:
            validate_group([[0, 1], [1, 1]])
        assert e.value.kind == "inverse"

    def test_malformed(self):
        with pytest.raises(ValueError):
            validate_group([[0, 1]])

    @pytest.mark.parametrize("G", fixture_groups(24), ids=lambda G: G.name)
    def test_fixtures_satisfy_axioms(self, G):
        assert brute_axioms(G.table)


class TestSubgroups:
    def test_z4(self):
        G = cyclic(4)
        subs = {H.elementset for H in G.subgroups()}
        assert subs == subgroups_by_small_generating_sets(G.table)
        assert len(subs) == 3
        assert [N.elements for N in normal_subgroups(G)] == [(0,), (0, 2), (0, 1, 2, 3)]

    def test_s3_normal(self):
        G = symmetric(3)
        oracle = {H for H in subgroups_by_small_generating_sets(G.table) if is_normal(G.table, H)}
        got = {N.elementset for N in normal_subgroups(G)}
        assert got == oracle
        assert sorted(len(N) for N in got) == [1, 3, 6]

    def test_trivial_group(self):
        assert len(cyclic(1).subgroups()) == 1

    @pytest.mark.parametrize("G", fixture_groups(24), ids=lambda G: G.name)
    def test_lattice_matches_oracle(self, G):
        # every subgroup of a group of order <= 24 here is 2-generated except
        # elementary abelian ones; use three generators to be safe
        oracle = subgroups_by_small_generating_sets(G.table, 3 if G.order <= 16 else 2)
        got = {H.elementset for H in G.subgroups()}
        assert oracle <= got
        assert all(naive_closure(G.table, H.elements) == H.elementset for H in G.subgroups())

    def test_simple(self):
        assert is_simple(cyclic(5))
        assert not is_simple(cyclic(4))
        A5 = alternating(5)
        assert A5.order == 60 and is_simple(A5)
        # independent: no union of conjugacy classes other than {1} and A5 is a subgroup
        classes = {frozenset(A5.conj(g, x) for g in range(60)) for x in range(60)}
        sizes = sorted(len(c) for c in classes)
        assert sizes == [1, 12, 12, 15, 20]

    def test_not_normal_error(self):
        G = symmetric(3)
        H = next(H for H in G.subgroups() if H.order == 2)
        with pytest.raises(NotNormal):
            quotient(G, H)


class TestQuotientKernel:
    def test_z4_mod_2(self):
        G = cyclic(4)
        Q, q = quotient(G, Subgroup(G, (0, 2)))
        assert Q.order == 2
        assert [q(x) for x in range(4)] == [0, 1, 0, 1]
        assert {frozenset(c) for c in cosets(G.table, (0, 2))} == {frozenset({0, 2}), frozenset({1, 3})}

    def test_mod_trivial(self):
        G = symmetric(3)
        Q, q = quotient(G, G.trivial_subgroup())
        assert Q == G and q.map == tuple(range(6))

    def test_s3_mod_a3(self):
        G = symmetric(3)
        A3 = next(N for N in normal_subgroups(G) if N.order == 3)
        Q, _ = quotient(G, A3)
        assert Q.order == 2 == len(cosets(G.table, A3.elements))

    def test_kernels(self):
        z4, z2 = cyclic(4), cyclic(2)
        assert kernel(GroupHom(z4, z2, (0, 1, 0, 1))).elements == (0, 2)
        assert kernel(GroupHom.identity(z4)).elements == (0,)
        double = GroupHom(z4, z4, tuple(2 * x % 4 for x in range(4)))
        assert double.is_homomorphism()
        assert kernel(double).elements == tuple(x for x in range(4) if 2 * x % 4 == 0)

    @pytest.mark.parametrize("G", fixture_groups(24), ids=lambda G: G.name)
    def test_round_trip(self, G):
        for N in normal_subgroups(G):
            Q, q = quotient(G, N)
            assert q.is_homomorphism() and q.is_surjective()
            assert Q.order * N.order == G.order
            assert kernel(q) == N
            assert kernel(q).normal


class TestResolution:
    def test_z4(self):
        r = resolve_finite(cyclic(4))
        assert r.validate() and r.kernel_orders() == [2, 2]
        assert [H.elements for H in r.chain] == [(0, 1, 2, 3), (0, 2), (0,)]

    def test_trivial(self):
        r = resolve_finite(cyclic(1))
        assert len(r.chain) == 1 and r.validate()

    def test_s3(self):
        assert resolve_finite(symmetric(3)).kernel_orders() == [2, 3]

    @pytest.mark.parametrize("G", fixture_groups(24), ids=lambda G: G.name)
    def test_valid_and_greedy(self, G):
        r = resolve_finite(G)
        assert r.validate()
        prod = 1
        for k in r.kernel_orders():
            prod *= k
        assert prod == G.order
        # greedy oracle: each step lands on a largest normal subgroup strictly inside
        normals = [H for H in subgroups_by_small_generating_sets(G.table, 3) if is_normal(G.table, H)]
        for H, K in zip(r.chain, r.chain[1:]):
            inside = [N for N in normals if N < H.elementset]
            assert K.order == max(len(N) for N in inside)


class TestProductChecks:
    def test_full_product(self):
        z2 = cyclic(2)
        P = direct_product(z2, z2)
        assert box1_hypotheses(z2, z2, P.whole()) and check_box1(z2, z2, P.whole())

    def test_diagonal(self):
        z2 = cyclic(2)
        P = direct_product(z2, z2)
        diag = P.subgroup([3])  # (1, 1)
        assert not box1_hypotheses(z2, z2, diag)
        assert not check_box1(z2, z2, diag)

    def test_giot_direct_product(self):
        z2 = cyclic(2)
        G = direct_product(z2, z2)
        A, C = G.subgroup([2]), G.subgroup([1])  # (1,0) and (0,1)
        assert check_giot_finite(G, A, A & C, C)

    def test_giot_hypothesis_unmet(self):
        G = cyclic(4)
        H = Subgroup(G, (0, 2))
        with pytest.raises(HypothesisUnmet):
            check_giot_finite(G, H, H, H)

    def test_isomorphism_search(self):
        assert find_isomorphism(cyclic(4), direct_product(cyclic(2), cyclic(2))) is None
        f = find_isomorphism(dihedral(4), dihedral(4))
        assert f is not None and f.is_homomorphism() and f.is_injective()
        assert find_isomorphism(quaternion(), dihedral(4)) is None
        assert find_isomorphism(direct_product(cyclic(2), cyclic(3)), cyclic(6)) is not None
