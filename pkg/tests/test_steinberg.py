from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from germscope_app.services.automaton import EvPeriodicWord, LiteralParseError
from germscope_app.services.groupoid import Cell, CoverPoint, Germ
from germscope_app.services.steinberg import (
    AlgebraElement,
    CoverInsufficient,
    RingMismatch,
    RingTag,
    add,
    brute_force_convolution,
    convolve,
    decompose,
    evaluate,
    evaluate_cover,
    format_algebra,
    involute,
    is_singular,
    is_zero,
    normalize,
    parse_algebra,
    parse_germ,
    scale,
    semantically_equal,
    subtract,
    support_partition,
    support_region,
)

from .conftest import load_context

Q = RingTag(0)
F2 = RingTag(2)
Z6 = RingTag(6)

GRIGORCHUK = load_context("grigorchuk")

BASES = ["(0)", "(1)", "(01)", "0(1)", "1(0)", "10(110)", "(001)", "11(0)", "01(0)", "(011)"]
SAMPLE_ELEMENTS = ["e", "a", "b", "c", "d", "a.b", "b.a"]


def _point(text: str) -> EvPeriodicWord:
    return EvPeriodicWord.parse(text)


def _unit(context, name: str, ring: RingTag = Q) -> AlgebraElement:
    return AlgebraElement.indicator(ring, Cell((), context.element(name), ()))


def _sample_germs(context):
    germs = []
    for text in BASES:
        base = _point(text)
        for name in SAMPLE_ELEMENTS:
            g = context.element(name)
            germs.append(Germ(base, (), g, ()))
            germs.append(Germ(base, (1,), g, base.take(1)))
            germs.append(Germ(base, (0, 1), g, base.take(2)))
    return germs


GERMS = _sample_germs(GRIGORCHUK)

words = st.lists(st.integers(min_value=0, max_value=1), max_size=1).map(tuple)
tail_sets = st.sampled_from([((),), ((0,),), ((1,),), ((0,), (1, 1))])
cells = st.builds(
    lambda u, name, v, tails: Cell(u, GRIGORCHUK.element(name), v, tails),
    words,
    st.sampled_from(SAMPLE_ELEMENTS),
    words,
    tail_sets,
)


def elements(ring: RingTag):
    term = st.tuples(st.integers(min_value=-2, max_value=2).map(ring.coerce), cells)
    return st.lists(term, min_size=1, max_size=2).map(lambda terms: AlgebraElement(ring, tuple(terms)))


# Rings ----------------------------------------------------------------------


def test_ring_arithmetic():
    assert Q.coerce("1/2") == Fraction(1, 2)
    assert RingTag(5).coerce("1/2") == 3
    assert Z6.add(4, 5) == 3
    assert Z6.neg(1) == 5
    assert str(Q) == "Q"
    assert str(Z6) == "Z/6"
    with pytest.raises(LiteralParseError):
        RingTag(4).coerce("1/2")
    with pytest.raises(ValueError):
        RingTag(1)


def test_mixed_rings_are_rejected(grigorchuk):
    with pytest.raises(RingMismatch):
        add(grigorchuk, _unit(grigorchuk, "b"), _unit(grigorchuk, "b", F2))


# Arithmetic -----------------------------------------------------------------


def test_normalize_merges_equal_cells(grigorchuk):
    f = AlgebraElement(Q, ((Fraction(1), Cell((), grigorchuk.element("b.c"), ())), (Fraction(2), Cell((), grigorchuk.element("d"), ()))))
    normal = normalize(grigorchuk, f)
    assert len(normal) == 1
    assert normal.coefficients == [Fraction(3)]


def test_normalize_drops_zero_terms(grigorchuk):
    assert len(subtract(grigorchuk, _unit(grigorchuk, "b"), _unit(grigorchuk, "b"))) == 0
    doubled = AlgebraElement(RingTag(4), ((2, Cell((), grigorchuk.element("a"), ())),))
    assert len(scale(grigorchuk, 2, doubled)) == 0


def test_split_cell_equals_whole_cell(grigorchuk):
    split = AlgebraElement.indicator(Q, Cell((), grigorchuk.element("b"), (), ((0,), (1,))))
    assert semantically_equal(grigorchuk, split, _unit(grigorchuk, "b"))


def test_convolution_of_spine_units(grigorchuk):
    product = convolve(grigorchuk, _unit(grigorchuk, "b"), _unit(grigorchuk, "c"))
    assert semantically_equal(grigorchuk, product, _unit(grigorchuk, "d"))
    square = convolve(grigorchuk, _unit(grigorchuk, "a"), _unit(grigorchuk, "a"))
    assert semantically_equal(grigorchuk, square, _unit(grigorchuk, "e"))


def test_involution_of_a_prefixed_cell(grigorchuk):
    f = AlgebraElement.indicator(Q, Cell((0,), grigorchuk.element("a"), (1,)))
    star = involute(grigorchuk, f)
    assert star.cells[0].u == (1,)
    assert star.cells[0].v == (0,)
    assert semantically_equal(grigorchuk, involute(grigorchuk, star), f)


def test_evaluation_counts_coinciding_cells(grigorchuk):
    f = add(grigorchuk, _unit(grigorchuk, "b"), _unit(grigorchuk, "c"))
    germ = Germ(_point("0(0)"), (), grigorchuk.element("b"), ())
    assert evaluate(grigorchuk, f, germ) == 2
    assert evaluate(grigorchuk, f, Germ(_point("(1)"), (), grigorchuk.element("b"), ())) == 1
    assert evaluate(grigorchuk, f, Germ(_point("(1)"), (), grigorchuk.element("d"), ())) == 0


# Support and singular elements ---------------------------------------------------


def test_erschler_singular_element(erschler):
    f = parse_algebra(erschler, "[|e|] - [|alpha|] - [|beta|] + [|gamma|]", Q)
    assert is_singular(erschler, f)
    assert not is_zero(erschler, f)


def test_grigorchuk_singular_element_needs_characteristic_two(grigorchuk):
    text = "[|e|] + [|b|] + [|c|] + [|d|]"
    binary = parse_algebra(grigorchuk, text, F2)
    assert is_singular(grigorchuk, binary)
    assert not is_zero(grigorchuk, binary)
    assert not is_singular(grigorchuk, parse_algebra(grigorchuk, text, Q))


def test_units_are_not_singular(grigorchuk):
    assert not is_singular(grigorchuk, _unit(grigorchuk, "e"))
    assert not is_singular(grigorchuk, _unit(grigorchuk, "b"))


def test_support_of_the_binary_element_is_the_spine(grigorchuk):
    f = parse_algebra(grigorchuk, "[|e|] + [|b|] + [|c|] + [|d|]", F2)
    nonzero = [c for c in support_partition(grigorchuk, f) if c.value != 0]
    assert nonzero
    assert all(c.sample == _point("(1)") for c in nonzero)
    regions = support_region(grigorchuk, f)
    assert len(regions) == 1
    compiled = grigorchuk.regions.compile(regions[0].region, regions[0].ambient)
    assert compiled.contains(_point("(1)"))
    assert not compiled.contains(_point("(0)"))


def test_zero_element_has_empty_support(grigorchuk):
    assert is_zero(grigorchuk, AlgebraElement(Q))
    assert support_region(grigorchuk, AlgebraElement(Q)) == []


# Decomposition --------------------------------------------------------------


def test_decompose_singular_element_along_its_cells(grigorchuk):
    f = parse_algebra(grigorchuk, "[|e|] + [|b|] + [|c|] + [|d|]", F2)
    covers = [Cell((), grigorchuk.element(name), ()) for name in "ebcd"]
    parts = decompose(grigorchuk, f, covers)
    assert len(parts) == 4
    for part, name in zip(parts, "ebcd"):
        assert semantically_equal(grigorchuk, part, _unit(grigorchuk, name, F2))


def test_decompose_moves_mass_to_coinciding_cover(grigorchuk):
    f = AlgebraElement.indicator(Q, Cell((), grigorchuk.element("b"), (), ((0,),)))
    covers = [Cell((), grigorchuk.element("b"), ()), Cell((), grigorchuk.element("c"), ())]
    parts = decompose(grigorchuk, f, covers)
    total = add(grigorchuk, parts[0], parts[1])
    assert semantically_equal(grigorchuk, total, f)


def test_decompose_rejects_uncovered_support(grigorchuk):
    with pytest.raises(CoverInsufficient):
        decompose(grigorchuk, _unit(grigorchuk, "a"), [Cell((), grigorchuk.element("b"), ())])


@settings(max_examples=20, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(min_value=-2, max_value=2),
            st.sampled_from(["b", "c"]),
            tail_sets,
        ),
        min_size=1,
        max_size=3,
    )
)
def test_decomposition_sums_back(terms):
    context = GRIGORCHUK
    f = AlgebraElement(Q, tuple((Q.coerce(c), Cell((), context.element(name), (), tails)) for c, name, tails in terms))
    covers = [Cell((), context.element("b"), ()), Cell((), context.element("c"), ())]
    parts = decompose(context, f, covers)
    total = AlgebraElement(Q)
    for part in parts:
        total = add(context, total, part)
    assert semantically_equal(context, total, f)


# Cover evaluation -------------------------------------------------------------


def test_evaluation_at_cover_points(grigorchuk, erschler):
    spine = _point("(1)")
    binary = parse_algebra(grigorchuk, "[|e|] + [|b|] + [|c|] + [|d|]", F2)
    pair = CoverPoint(spine, 0, (grigorchuk.element("e"), grigorchuk.element("b")))
    assert evaluate_cover(grigorchuk, binary, pair) == 0

    rational = parse_algebra(erschler, "[|e|] - [|alpha|] - [|beta|] + [|gamma|]", Q)
    alpha = CoverPoint(spine, 0, (erschler.element("e"), erschler.element("alpha")))
    assert evaluate_cover(erschler, rational, alpha) == 0
    unit = CoverPoint(spine, 0, (erschler.element("e"),))
    assert evaluate_cover(erschler, rational, unit) == 1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_cover_value_is_the_limit_of_unit_values(grigorchuk, k):
    binary = parse_algebra(grigorchuk, "[|e|] + [|b|] + [|c|] + [|d|]", F2)
    pair = CoverPoint(_point("(1)"), 0, (grigorchuk.element("e"), grigorchuk.element("b")))
    approaching = EvPeriodicWord((1,) * (3 * k) + (1, 1, 0), (0,))
    unit = Germ(approaching, (), grigorchuk.element("e"), ())
    assert evaluate(grigorchuk, binary, unit) == evaluate_cover(grigorchuk, binary, pair)


# Algebraic laws -----------------------------------------------------------------


def test_sample_germs_cover_every_base():
    assert len(GERMS) >= 200
    assert {germ.base for germ in GERMS} == {_point(text) for text in BASES}


@pytest.mark.parametrize("ring", [Q, Z6], ids=str)
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_convolution_is_associative(ring, data):
    context = GRIGORCHUK
    f, g, h = (data.draw(elements(ring)) for _ in range(3))
    left = convolve(context, convolve(context, f, g), h)
    right = convolve(context, f, convolve(context, g, h))
    assert semantically_equal(context, left, right)
    for germ in GERMS:
        assert evaluate(context, left, germ) == evaluate(context, right, germ)


@pytest.mark.parametrize("ring", [Q, Z6], ids=str)
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_involution_reverses_products(ring, data):
    context = GRIGORCHUK
    f, g = (data.draw(elements(ring)) for _ in range(2))
    left = involute(context, convolve(context, f, g))
    right = convolve(context, involute(context, g), involute(context, f))
    assert semantically_equal(context, left, right)
    for germ in GERMS:
        assert evaluate(context, left, germ) == evaluate(context, right, germ)


@settings(max_examples=15, deadline=None)
@given(elements(Q), elements(Q))
def test_convolution_matches_brute_force(f, g):
    context = GRIGORCHUK
    product = convolve(context, f, g)
    for germ in GERMS[::5]:
        assert evaluate(context, product, germ) == brute_force_convolution(context, f, g, germ)


@settings(max_examples=10, deadline=None)
@given(elements(F2))
def test_singular_elements_form_an_ideal(g):
    context = GRIGORCHUK
    singular = parse_algebra(context, "[|e|] + [|b|] + [|c|] + [|d|]", F2)
    assert is_singular(context, convolve(context, g, singular))
    assert is_singular(context, convolve(context, singular, g))


# Literals -------------------------------------------------------------------


def test_parse_algebra_literals(grigorchuk):
    f = parse_algebra(grigorchuk, "2*[0|a|1] - 1/2[|e||0,11]", Q)
    assert f.coefficients == [Fraction(2), Fraction(-1, 2)]
    assert f.cells[0] == Cell((0,), grigorchuk.element("a"), (1,))
    assert f.cells[1].tails == ((0,), (1, 1))
    assert len(parse_algebra(grigorchuk, "0", Q)) == 0
    assert parse_algebra(grigorchuk, "[|b|]", Z6).coefficients == [1]


@pytest.mark.parametrize("text", ["[|b|] [|c|]", "[|z|]", "b + c", "[0|a]"])
def test_parse_algebra_rejects_malformed_input(grigorchuk, text):
    with pytest.raises(LiteralParseError):
        parse_algebra(grigorchuk, text, Q)


def test_format_algebra_reads_back(grigorchuk):
    f = parse_algebra(grigorchuk, "2*[0|a|1] - 1/2[|e||0,11] + [|b|]", Q)
    assert format_algebra(grigorchuk, AlgebraElement(Q)) == "0"
    again = parse_algebra(grigorchuk, format_algebra(grigorchuk, f), Q)
    assert again == f


def test_parse_germ(grigorchuk):
    germ = parse_germ(grigorchuk, "b@(1)")
    assert germ.base == _point("(1)")
    assert germ.g == grigorchuk.element("b")
    prefixed = parse_germ(grigorchuk, "[0|a|1]@1(0)")
    assert (prefixed.u, prefixed.v) == ((0,), (1,))
    with pytest.raises(LiteralParseError):
        parse_germ(grigorchuk, "b(1)")
