import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitcode.gspace import (
    BasicSet,
    CapacityError,
    EffectiveGSpace,
    InstanceError,
    LogicSignature,
    SpaceError,
    bits,
    build_logic_action,
    canonical_partition,
    coding_function,
    export_mx,
    imp,
    mask_of,
    parse_designator,
    parse_instance,
    read_mx,
    restrict,
    sat,
    saturate,
    vaught_orbit,
    write_mx,
)
from orbitcode.perm import (
    EMPTY,
    PartialBijection,
    compose_right,
    pointwise_stabilizer,
    symmetric_group,
    trivial_group,
)
from suite import brute_vaught, logic_space, relabel, suite

P = PartialBijection.from_dict
# TINY points: 0 = P empty, 1 = P={0}, 2 = P={1}, 3 = P={0,1}
EMPTYP, P0, P1, P01 = 0, 1, 2, 3


def test_tiny_shape(tiny_space):
    assert tiny_space.n == 4 and tiny_space.L == 4
    assert [b.name for b in tiny_space.basis] == ["P(0)+", "P(0)-", "P(1)+", "P(1)-"]
    assert [tiny_space.name(x) for x in range(4)] == ["-", "P(0)", "P(1)", "P(0);P(1)"]
    assert tiny_space.basis[2].invariance_tag == frozenset({1})


def test_vaught_orbit_examples(tiny_space):
    assert vaught_orbit(tiny_space, EMPTY, P0) == {P0, P1}
    assert vaught_orbit(tiny_space, P({0: 0}), P0) == {P0}
    assert vaught_orbit(tiny_space, EMPTY, EMPTYP) == {EMPTYP}


def test_vaught_orbit_empty_coset():
    space = logic_space("P", 2, "triv")
    with pytest.raises(SpaceError, match="sigma not in S\\^G"):
        vaught_orbit(space, P({0: 1}), 0)


def test_sat_examples(tiny_space):
    assert sat(tiny_space, P0, EMPTY, 0)
    assert not sat(tiny_space, EMPTYP, EMPTY, 0)
    with pytest.raises(IndexError):
        sat(tiny_space, P0, EMPTY, 4)


def test_sat_whole_space_basis():
    space = build_logic_action(LogicSignature(()), 2, symmetric_group(2))
    assert space.n == 1 and space.basis[0].name == "X"
    assert sat(space, 0, EMPTY, 0)


def test_coding_function_examples(tiny_space):
    assert coding_function(tiny_space, P0)(EMPTY) == {0, 1, 2, 3}
    assert coding_function(tiny_space, P01)(EMPTY) == {0, 2}
    triv = logic_space("P", 2, "triv")
    assert coding_function(triv, P0)(P({0: 1})) == frozenset()


def test_imp_examples(tiny_space):
    assert imp(tiny_space, set(), 0, 2)
    for c in [set(), {0}, {0, 1}]:
        for l in range(4):
            assert imp(tiny_space, c, l, l)
    assert not imp(tiny_space, {0, 1}, 0, 1)
    with pytest.raises(SpaceError):
        imp(tiny_space, {5}, 0, 0)


def test_saturate_examples(tiny_space):
    assert saturate(tiny_space, trivial_group(2), {P0, P01}) == {P0, P01}
    assert saturate(tiny_space, symmetric_group(2), {P0}) == {P0, P1}
    assert saturate(tiny_space, symmetric_group(2), set()) == frozenset()
    with pytest.raises(SpaceError):
        saturate(tiny_space, [(2, 0, 1)], {0})


def test_canonical_partition_examples(tiny_space):
    assert canonical_partition(tiny_space) == [{EMPTYP}, {P0, P1}, {P01}]
    one = build_logic_action(LogicSignature(()), 3, symmetric_group(3))
    assert canonical_partition(one) == [{0}]
    triv = logic_space("PQ", 2, "triv")
    fibers: dict = {}
    for x in range(triv.n):
        fibers.setdefault(triv.signature(x), set()).add(x)
    assert sorted(canonical_partition(triv), key=min) == sorted(map(frozenset, fibers.values()), key=min)


def test_build_logic_action_sizes():
    assert logic_space("E", 2).n == 16 and logic_space("E", 2).L == 8
    assert build_logic_action(LogicSignature(()), 4, symmetric_group(4)).n == 1
    with pytest.raises(CapacityError):
        build_logic_action(LogicSignature((("E", 2),)), 5, symmetric_group(5))
    with pytest.raises(SpaceError):
        build_logic_action(LogicSignature((("T", 3),)), 2, symmetric_group(2))


def test_signature_validation():
    with pytest.raises(SpaceError):
        LogicSignature((("P", 1), ("P", 2)))
    with pytest.raises(SpaceError):
        LogicSignature((("9x", 1),))
    with pytest.raises(SpaceError):
        LogicSignature((("P", 0),))


def test_designators(tiny_space):
    assert parse_designator(tiny_space, "") == EMPTYP
    assert parse_designator(tiny_space, "-") == EMPTYP
    assert parse_designator(tiny_space, "P(1);P(0)") == P01
    space = logic_space("E", 2)
    x = parse_designator(space, "E(0,1);E(1,1)")
    assert space.name(x) == "E(0,1);E(1,1)"
    for bad in ["Q(0)", "P(2)", "P(0,1)", "P(a)", "P"]:
        with pytest.raises(SpaceError):
            parse_designator(tiny_space, bad)


def test_hand_built_space_checks():
    G = symmetric_group(2)
    basis = [BasicSet(0, frozenset({0}), frozenset({0}), "a"),
             BasicSet(1, frozenset({1}), frozenset({0}), "b")]
    table = np.array([[0, 1], [1, 0]])
    space = EffectiveGSpace(G, ["a", "b"], table, basis)
    assert space.index_of("b") == 1
    assert space.basis_perm[G.elements.index((1, 0))] == (1, 0)
    with pytest.raises(SpaceError):
        EffectiveGSpace(G, ["a", "b"], np.array([[0, 1], [0, 0]]), basis)
    with pytest.raises(SpaceError):
        EffectiveGSpace(G, ["a", "b"], np.array([[1, 0], [1, 0]]), basis)
    with pytest.raises(SpaceError):
        EffectiveGSpace(G, ["a", "b"], table, basis[:1])


def test_restrict_keeps_orbits(tiny_space):
    sub = restrict(tiny_space, [P0, P1])
    assert sub.n == 2
    assert parse_designator(sub, "P(1)") == 1
    with pytest.raises(SpaceError):
        restrict(tiny_space, [P0])
    with pytest.raises(SpaceError):
        parse_designator(sub, "")


def test_mask_helpers_agree_on_large_inputs():
    idx = list(range(0, 5000, 7))
    m = mask_of(idx)
    assert bits(m) == idx
    assert mask_of(idx[:10]) == sum(1 << i for i in idx[:10])


def test_instance_parsing():
    inst = parse_instance("#gspace v1\n# comment\nwindow 3\ngen (0 1 2)\nrel E 2 # trailing\n")
    assert inst.window == 3 and inst.generators == [(1, 2, 0)]
    assert inst.build().n == 512


@pytest.mark.parametrize("text,line", [
    ("window 2\n", 1),
    ("#gspace v1\nwindow x\n", 2),
    ("#gspace v1\nwindow 9\n", 2),
    ("#gspace v1\nwindow 2\nwindow 2\n", 3),
    ("#gspace v1\nwindow 2\ngen (0 5)\n", 3),
    ("#gspace v1\nwindow 2\nrel P\n", 3),
    ("#gspace v1\nwindow 2\nfoo 1\n", 3),
    ("#gspace v1\nrel P 1\n", 3),
])
def test_instance_errors_are_line_numbered(text, line):
    with pytest.raises(InstanceError) as err:
        parse_instance(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def test_export_mx_tiny(tiny_space):
    text = export_mx(tiny_space, EMPTYP)
    data = read_mx(text)
    assert data.window == 2 and data.point == "-"
    cf = coding_function(tiny_space, EMPTYP)
    expected = sorted((s, l) for s in tiny_space.group.sgfin for l in cf(s))
    assert sorted(data.sat) == expected
    assert write_mx(data) == text
    assert text.startswith("#mx v1\nwindow 2\npoint -\nsgfin:\n-\n")


def test_export_mx_empty_signature():
    space = build_logic_action(LogicSignature(()), 2, symmetric_group(2))
    data = read_mx(export_mx(space, 0))
    assert data.sat and all(l == 0 for _, l in data.sat)


def test_read_mx_errors():
    with pytest.raises(SpaceError, match="line 1"):
        read_mx("mx\n")
    with pytest.raises(SpaceError, match="line 5"):
        read_mx("#mx v1\nwindow 2\npoint -\nimp:\nbad\n")


@pytest.mark.parametrize("label,space", suite(skip_large=True))
def test_basis_sets_invariant_under_their_tag(label, space):
    for b in space.basis:
        H = pointwise_stabilizer(space.group, b.invariance_tag)
        assert saturate(space, H, b.members) == b.members


@pytest.mark.parametrize("label,space", suite(skip_large=True))
def test_action_table_matches_relabeling(label, space):
    for e, g in enumerate(space.elements):
        for x in range(space.n):
            assert space.table[e, x] == relabel(space, g, x)


@pytest.mark.parametrize("label,space", suite(skip_large=True))
def test_coding_function_transport(label, space):
    for x in range(space.n):
        for g in space.elements:
            gx = space.act(g, x)
            for s in space.group.sgfin:
                assert space.f1(gx, s) == space.f1(x, compose_right(s, g))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.sampled_from(logic_space("PQ", 3).group.sgfin))
def test_vaught_orbit_matches_brute_force(x, s):
    space = logic_space("PQ", 3)
    assert vaught_orbit(space, s, x) == brute_vaught(space, s, x)
