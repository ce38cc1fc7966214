from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from germscope_app.services.automaton import EvPeriodicWord, GroupElement
from germscope_app.services.groupoid import (
    Cell,
    CompactOpenSet,
    D0Verdict,
    Germ,
    IncompatibleBase,
    cell_contains,
    compose_cells,
    compose_germs,
    d0_status,
    fiber,
    find_nonregular_witness,
    germ_equal,
    intersect_tails,
    invert_cell,
    invert_germ,
    is_dangerous,
    is_hausdorff,
    localize,
    range_point,
    realizing_pattern,
    regular_open,
    residual_tails,
    stabilized_depth,
)

from .conftest import load_context


def _point(text: str) -> EvPeriodicWord:
    return EvPeriodicWord.parse(text)


# Cells ----------------------------------------------------------------------


def test_residual_tails():
    assert residual_tails([(0, 1)], (0,)) == ((1,),)
    assert residual_tails([(0,)], (0, 1)) == ((),)
    assert residual_tails([(1,)], (0,)) == ()
    assert residual_tails([(0, 1), (0, 0, 1)], (0,)) == ((0, 1), (1,))
    assert intersect_tails([(0, 1), (1,)], (0,)) == ((0, 1),)


def test_cell_tails_are_prefix_free_and_normalize():
    cell = Cell((), GroupElement(), (), ((0,), (0, 1), (1,)))
    assert cell.tails == ((0,), (1,))
    assert cell.normalized(2).tails == ((),)
    assert Cell((), GroupElement(), (), ((0, 0), (0, 1), (1, 0))).normalized(2).tails == ((0,), (1, 0))


def test_cell_germ_membership(grigorchuk):
    b = grigorchuk.element("b")
    cell = Cell((), b, (), ((0,),))
    assert cell.source_contains(_point("0(1)"))
    assert not cell.source_contains(_point("(1)"))
    assert cell_contains(grigorchuk, cell, Germ(_point("0(1)"), (), b, ()))
    assert cell_contains(grigorchuk, cell, Germ(_point("0(0)"), (), grigorchuk.element("c"), ()))
    assert not cell_contains(grigorchuk, cell, Germ(_point("0(1)"), (), grigorchuk.element("e"), ()))


def test_composition_of_spine_cells(grigorchuk):
    b, c, d = (grigorchuk.element(name) for name in "bcd")
    composed = compose_cells(grigorchuk, Cell((), b, ()), Cell((), c, ()))
    assert len(composed) == 1
    germ = Germ(_point("(01)"), (), d, ())
    assert composed.contains_germ(grigorchuk, germ)


def test_composition_respects_prefixes(grigorchuk):
    a = grigorchuk.element("a")
    e = grigorchuk.element("e")
    # [0|e|1] after [1|a|0]: the source 0ξ is mapped to 0·(a ξ) through 1ξ.
    composed = compose_cells(grigorchuk, Cell((0,), e, (1,)), Cell((1,), a, (0,)))
    assert [(cell.u, cell.v) for cell in composed] == [((0,), (0,))]
    assert not compose_cells(grigorchuk, Cell((), e, (0,)), Cell((1,), e, ())).cells


def test_inverse_cell_swaps_prefixes(grigorchuk):
    a = grigorchuk.element("a")
    cell = Cell((0,), a, (1,))
    inverse = invert_cell(grigorchuk, cell)
    assert (inverse.u, inverse.v) == ((1,), (0,))
    assert grigorchuk.automaton.is_trivial(inverse.g * a)


def test_inverse_cell_moves_tails(grigorchuk):
    a = grigorchuk.element("a")
    inverse = invert_cell(grigorchuk, Cell((), a, (), ((0,),)))
    assert inverse.tails == ((1,),)


# Germs ----------------------------------------------------------------------


def test_germ_equality(grigorchuk):
    b, c, e = (grigorchuk.element(name) for name in "bce")
    base = _point("0(0)")
    assert germ_equal(grigorchuk, Germ(base, (), b, ()), Germ(base, (), c, ()))
    assert not germ_equal(grigorchuk, Germ(base, (), b, ()), Germ(base, (), e, ()))
    assert not germ_equal(grigorchuk, Germ(base, (), b, ()), Germ(_point("(1)"), (), b, ()))
    # Same germ written at different depths.
    assert germ_equal(grigorchuk, Germ(base, (), b, ()), Germ(base, (0,), grigorchuk.element("a"), (0,)))


def test_boundary_germs_differ_from_the_unit(grigorchuk):
    spine = _point("(1)")
    e = grigorchuk.element("e")
    for name in "bcd":
        assert not germ_equal(grigorchuk, Germ(spine, (), grigorchuk.element(name), ()), Germ(spine, (), e, ()))


def test_incompatible_base_is_rejected(grigorchuk):
    with pytest.raises(IncompatibleBase):
        Germ(_point("(1)"), (), grigorchuk.element("a"), (0,))


def test_germ_inverse_and_composition(grigorchuk):
    a = grigorchuk.element("a")
    germ = Germ(_point("0(1)"), (), a, ())
    assert range_point(grigorchuk, germ) == _point("(1)")
    inverse = invert_germ(grigorchuk, germ)
    assert inverse.base == _point("(1)")
    unit = compose_germs(grigorchuk, inverse, germ)
    assert germ_equal(grigorchuk, unit, Germ(_point("0(1)"), (), grigorchuk.element("e"), ()))
    with pytest.raises(IncompatibleBase):
        compose_germs(grigorchuk, germ, germ)


def test_localize_groups_cells_by_source_prefix(grigorchuk):
    b, d = grigorchuk.element("b"), grigorchuk.element("d")
    frames = localize(grigorchuk, [Cell((), b, ()), Cell((), d, (1,))])
    assert [frame.v for frame in frames] == [(0,), (1,)]
    assert [len(frame.cells) for frame in frames] == [1, 2]


# Dangerous points and fibers ------------------------------------------------


def test_spine_is_dangerous(grigorchuk):
    dangerous, witnesses = is_dangerous(grigorchuk, _point("(1)"))
    assert dangerous
    assert {grigorchuk.name(n) for _, n in witnesses} == {"b", "c", "d"}


def test_generic_point_is_not_dangerous(grigorchuk):
    dangerous, witnesses = is_dangerous(grigorchuk, _point("0(01)"))
    assert not dangerous
    assert witnesses == []


def test_odometer_has_no_dangerous_points(odometer):
    assert not is_dangerous(odometer, _point("(1)"))[0]
    assert not is_dangerous(odometer, _point("(0)"))[0]


def test_stabilized_depth_over_the_spine(grigorchuk):
    depth, members = stabilized_depth(grigorchuk, _point("(1)"))
    assert depth == 0
    assert [grigorchuk.name(m) for m in members] == ["e", "b", "c", "d"]


@pytest.mark.parametrize(
    "fixture, text, size",
    [
        ("grigorchuk", "0(01)", 1),
        ("grigorchuk", "0(1)", 4),
        ("grigorchuk", "10(1)", 4),
        ("grigorchuk", "(10)", 1),
        ("grigorchuk", "01(110)", 1),
        ("erschler", "0(1)", 3),
    ],
)
def test_stabilized_members_are_constant_past_the_preperiod(request, fixture, text, size):
    context = request.getfixturevalue(fixture)
    point = _point(text)
    depth, members = stabilized_depth(context, point)
    assert depth <= len(point.prefix)
    assert len(members) == size
    for shift in range(len(point.prefix), len(point.prefix) + 2 * len(point.period)):
        assert len(stabilized_depth(context, point.drop(shift))[1]) == size


def test_grigorchuk_spine_fiber(grigorchuk):
    points = fiber(grigorchuk, _point("(1)"))
    assert sorted(sorted(grigorchuk.name(m) for m in p.members) for p in points) == [
        ["b", "e"],
        ["c", "e"],
        ["d", "e"],
        ["e"],
    ]


def test_erschler_spine_fiber(erschler):
    points = fiber(erschler, _point("(1)"))
    assert sorted(sorted(erschler.name(m) for m in p.members) for p in points) == [
        ["alpha", "e"],
        ["beta", "e"],
        ["e"],
    ]


def test_fiber_over_a_generic_point_is_a_single_unit(grigorchuk):
    points = fiber(grigorchuk, _point("0(01)"))
    assert len(points) == 1
    assert [grigorchuk.name(m) for m in points[0].members] == ["e"]


def test_fiber_over_a_preperiodic_point(grigorchuk):
    assert len(fiber(grigorchuk, _point("0(1)"))) == 4


@pytest.mark.parametrize("member, word", [("d", (0,)), ("c", (1, 0)), ("b", (1, 1, 0))])
def test_realizing_patterns_on_the_spine(grigorchuk, member, word):
    points = fiber(grigorchuk, _point("(1)"))
    target = next(p for p in points if [grigorchuk.name(m) for m in p.members] == ["e", member])
    phases = realizing_pattern(grigorchuk, target)
    assert len(phases) == 3
    assert phases[0].word == word
    assert phases[0].open


def test_unit_cover_point_is_realized_by_the_base_itself(grigorchuk):
    points = fiber(grigorchuk, _point("(1)"))
    unit = next(p for p in points if len(p.members) == 1)
    phases = realizing_pattern(grigorchuk, unit)
    assert all(not phase.open for phase in phases)
    assert phases[0].sample == _point("(1)")


# Regular open sets and D0 -----------------------------------------------------


def test_unit_space_is_regular_open(grigorchuk):
    assert regular_open(grigorchuk, CompactOpenSet((Cell((), grigorchuk.element("e"), ()),)))


def test_spine_union_is_not_regular_open(grigorchuk):
    cells = tuple(Cell((), grigorchuk.element(name), ()) for name in "bcd")
    assert not regular_open(grigorchuk, CompactOpenSet(cells))


def test_nonregular_witness(grigorchuk, odometer):
    witness = find_nonregular_witness(grigorchuk)
    assert witness is not None
    assert not regular_open(grigorchuk, witness)
    assert find_nonregular_witness(odometer) is None


def test_hausdorff_flags(grigorchuk, odometer, gupta_sidki):
    assert not is_hausdorff(grigorchuk)
    assert is_hausdorff(odometer)
    assert is_hausdorff(gupta_sidki)


def test_grigorchuk_singular_cover_part_is_nonempty(grigorchuk):
    status = d0_status(grigorchuk)
    assert status.verdict is D0Verdict.NONEMPTY
    assert status.witness.cylinder == ()
    assert {grigorchuk.name(g) for g in status.witness.elements} == {"b", "c", "d"}
    assert status.nonregular_witness is not None


@pytest.mark.parametrize("fixture", ["odometer", "gupta_sidki"])
def test_hausdorff_groups_have_empty_singular_cover_part(request, fixture):
    status = d0_status(request.getfixturevalue(fixture))
    assert status.verdict is D0Verdict.EMPTY
    assert status.hausdorff


def test_d0_budget_is_inconclusive(grigorchuk):
    assert d0_status(grigorchuk, max_subsets=1).verdict is D0Verdict.INCONCLUSIVE


@pytest.mark.parametrize("member, word", [("alpha", (0,)), ("beta", (1, 0))])
def test_realizing_patterns_on_the_erschler_spine(erschler, member, word):
    points = fiber(erschler, _point("(1)"))
    target = next(p for p in points if [erschler.name(m) for m in p.members] == ["e", member])
    phases = realizing_pattern(erschler, target)
    assert len(phases) == 2
    assert phases[0].word == word


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=1), max_size=4),
    st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=3),
)
def test_odometer_points_are_never_dangerous(prefix, period):
    odometer = load_context("odometer")
    assert not is_dangerous(odometer, EvPeriodicWord(tuple(prefix), tuple(period)))[0]


# Groupoid laws on random germs ----------------------------------------------

GRIGORCHUK = load_context("grigorchuk")

bits = st.lists(st.integers(min_value=0, max_value=1), max_size=2).map(tuple)
names = st.lists(st.sampled_from("abcd"), max_size=3).map(".".join)
points = st.builds(
    lambda prefix, period: EvPeriodicWord(tuple(prefix), tuple(period)),
    st.lists(st.integers(min_value=0, max_value=1), max_size=4),
    st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=3),
)
cells = st.builds(lambda u, name, v: Cell(u, GRIGORCHUK.element(name), v), bits, names, bits)


def _germ_at(base: EvPeriodicWord, name: str, depth: int) -> Germ:
    automaton = GRIGORCHUK.automaton
    g = GRIGORCHUK.element(name)
    v = base.take(depth)
    return Germ(base, automaton.act_word(g, v), automaton.section(g, v), v)


def _compose_sets(first, second) -> CompactOpenSet:
    return CompactOpenSet(
        tuple(cell for left in first for right in second for cell in compose_cells(GRIGORCHUK, left, right))
    )


@settings(max_examples=500, deadline=None)
@given(points, st.lists(st.tuples(names, st.integers(min_value=0, max_value=3)), min_size=3, max_size=3))
def test_germ_equality_is_an_equivalence(base, drawn):
    x, y, z = (_germ_at(base, name, depth) for name, depth in drawn)
    assert germ_equal(GRIGORCHUK, x, x)
    assert germ_equal(GRIGORCHUK, x, y) == germ_equal(GRIGORCHUK, y, x)
    if germ_equal(GRIGORCHUK, x, y) and germ_equal(GRIGORCHUK, y, z):
        assert germ_equal(GRIGORCHUK, x, z)


@settings(max_examples=200, deadline=None)
@given(cells, cells, cells, points, names)
def test_cell_composition_is_associative(first, second, third, base, name):
    left = _compose_sets(compose_cells(GRIGORCHUK, first, second), (third,))
    right = _compose_sets((first,), compose_cells(GRIGORCHUK, second, third))
    germs = [_germ_at(base, name, 0)]
    germs += [Germ(base, cell.u, cell.g, cell.v) for cell in (*left, *right) if cell.source_contains(base)]
    for germ in germs:
        assert left.contains_germ(GRIGORCHUK, germ) == right.contains_germ(GRIGORCHUK, germ)
