import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitcode.conjugacy import (
    CyclePermutation,
    Ghost,
    SeparatingOpenSet,
    conjugate_by,
    cosets_disjoint,
    cycle_type,
    is_conjugate,
    parse_cycle_permutation,
    power_apply,
    rank_one_separation_check,
    separating_open_set,
)
from orbitcode.perm import PermError
from suite import conjugation_orbits

C = parse_cycle_permutation


def subsets(n):
    return [frozenset(s) for r in range(n + 1) for s in itertools.combinations(range(n), r)]


def test_cycle_type_examples():
    assert cycle_type(C("()")).finite == () and cycle_type(C("()")).fixed_cofinite
    assert cycle_type(C("(0 1)")).finite == (2,)
    assert cycle_type(C("(0 1 2)(3 4)")).finite == (3, 2)
    t = cycle_type(C("(a: ... 3 4 ...)(0 1)"))
    assert t.infinite == 1 and not t.fixed_cofinite


def test_is_conjugate_examples():
    assert is_conjugate(C("(0 1)"), C("(0 2)"))
    assert not is_conjugate(C("(0 1)"), C("(0 1 2)"))
    f = C("(0 3)(1 4 2)")
    assert is_conjugate(f, f)


def test_power_apply_examples():
    f = C("(0 1 2)")
    assert power_apply(f, 0, 7) == 7
    assert power_apply(f, 2, 0) == 2
    assert power_apply(f, -1, 0) == 2
    g = C("(a: ... 3 4 ...)")
    assert power_apply(g, 1, 3) == 4
    assert power_apply(g, 5, 3) == Ghost("a", 5)
    assert power_apply(g, -2, 3) == Ghost("a", -2)
    assert power_apply(g, 2, Ghost("a", -2)) == 3


def test_parse_round_trip_and_errors():
    for text in ["()", "(0 1)", "(0 2 1)(3 4)", "(0 1)(a: ... 5 6 7 ...)"]:
        assert str(C(text)) == text
    assert str(C("(2 0 1)")) == "(0 1 2)"
    for bad in ["(0 0)", "(0 1)(1 2)", "(a: ... 1 x ...)", "(-1 2)"]:
        with pytest.raises(PermError):
            C(bad)


def test_cosets_disjoint_examples():
    f, g = C("(0 1)"), C("(0 2)")
    res = cosets_disjoint(f, g, {0})
    assert not res.disjoint and str(res.conjugator) == "(1 2)"
    res = cosets_disjoint(f, g, {0, 1})
    assert res.disjoint and (res.k, res.m) == (0, 1)
    for c in subsets(3):
        res = cosets_disjoint(f, f, c)
        assert not res.disjoint and conjugate_by(res.conjugator, f) == f
    assert str(cosets_disjoint(f, f, {0}).conjugator) == "()"
    with pytest.raises(PermError, match="conjugate"):
        cosets_disjoint(C("(0 1)"), C("(0 1 2)"), {0})


def test_infinite_cycles_in_criterion():
    f = C("(a: ... 0 1 2 ...)")
    g = C("(b: ... 0 2 1 ...)")
    res = cosets_disjoint(f, g, {0, 1})
    assert res.disjoint and (res.k, res.m) == (0, 1)
    same = cosets_disjoint(f, C("(b: ... 0 1 5 ...)"), {0, 1})
    assert not same.disjoint and same.conjugator is None and same.core[2] == 5


def test_separating_open_set_examples():
    f, g = C("(0 1)"), C("(0 2)")
    sep = separating_open_set(f, g, {0, 1})
    assert sep == SeparatingOpenSet(0, 1, 1)
    assert sep.contains(f) and not sep.contains(g)
    # the image lands in c only on the second side: closed complement
    flip = separating_open_set(g, f, {0, 1})
    assert flip.closed and flip.separates(g) and not flip.separates(f)
    # a chain of length one is just the basic open set {p : p(k) = l}
    one = SeparatingOpenSet(0, 1, 1)
    assert one.contains(C("(0 1 3)")) and not one.contains(C("(0 3 1)"))
    assert "k=0 l=1 m=1" in one.describe()
    with pytest.raises(PermError):
        separating_open_set(f, g, {0})


def test_chain_intermediates_avoid_endpoints():
    sep = SeparatingOpenSet(0, 3, 3)
    assert sep.contains(C("(0 1 2 3)"))
    assert not sep.contains(C("(0 1 3 2)"))
    assert not sep.contains(C("(0 3 1 2)"))


def test_rank_one_check_examples():
    f, g = C("(0 1)"), C("(0 2)")
    assert rank_one_separation_check([], subsets(3)).entries == []
    rep = rank_one_separation_check([(f, f)], subsets(3))
    assert rep.all_verified and rep.disjoint_cases() == []
    rep = rank_one_separation_check([(f, g)], subsets(3), samples=8)
    assert rep.all_verified
    # only c = {} and c = {0} leave room for a conjugator swapping 1 and 2
    assert {e["c"] for e in rep.disjoint_cases()} == set(subsets(3)) - {frozenset(), frozenset({0})}


def test_rank_one_check_on_infinite_pair():
    rep = rank_one_separation_check([(C("(a: ... 0 1 2 ...)"), C("(b: ... 0 2 1 ...)"))], [{0, 1}])
    assert rep.all_verified and len(rep.disjoint_cases()) == 1


def conjugate_pairs(n):
    perms = list(itertools.permutations(range(n)))
    by_type: dict = {}
    for p in perms:
        by_type.setdefault(cycle_type(CyclePermutation.from_tuple(p)), []).append(p)
    for group in by_type.values():
        yield from itertools.product(group, repeat=2)


@pytest.mark.parametrize("n,cmax", [(3, 3), (4, 3), (5, 2)])
def test_criterion_matches_brute_force(n, cmax):
    for c in subsets(cmax):
        orbits = conjugation_orbits(n, c)
        for a, b in conjugate_pairs(n):
            f, g = CyclePermutation.from_tuple(a), CyclePermutation.from_tuple(b)
            res = cosets_disjoint(f, g, c)
            assert res.disjoint == (orbits[a] != orbits[b])
            if res.disjoint:
                sep = separating_open_set(f, g, c)
                assert sep.separates(f) and not sep.separates(g)
            else:
                h = res.conjugator
                assert conjugate_by(h, f) == g and all(h(k) == k for k in c)


def test_extra_room_does_not_change_verdicts():
    # allowing two spare points changes no verdict on window-4 pairs
    for c in subsets(3):
        small, big = conjugation_orbits(4, c), conjugation_orbits(6, c)
        for a, b in conjugate_pairs(4):
            assert (small[a] == small[b]) == (big[a + (4, 5)] == big[b + (4, 5)])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_separator_holds_on_coset_samples(seed):
    rng = random.Random(seed)
    a = list(range(6))
    rng.shuffle(a)
    sigma = list(range(6))
    rng.shuffle(sigma)
    f = CyclePermutation.from_tuple(a)
    g = conjugate_by(CyclePermutation.from_tuple(sigma), f)
    c = frozenset(rng.sample(range(6), rng.randint(0, 4)))
    rep = rank_one_separation_check([(f, g)], [c], samples=6, seed=seed)
    assert rep.all_verified
