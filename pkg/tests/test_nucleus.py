from __future__ import annotations

import itertools

import pytest

from germscope_app.services.nucleus import Inconclusive, NucleusBudget, compute_nucleus, nucleus_step

from .conftest import load_context


@pytest.mark.parametrize(
    "name, expected",
    [
        ("grigorchuk", {"e", "a", "b", "c", "d"}),
        ("grigorchuk_erschler", {"e", "h", "alpha", "beta", "gamma"}),
        ("odometer", {"e", "a", "a'"}),
        ("gupta_sidki3", {"e", "a", "a2", "t", "t'"}),
    ],
)
def test_nucleus_of_corpus(name, expected):
    assert set(load_context(name).nucleus.names) == expected


@pytest.mark.parametrize("name", ["grigorchuk", "grigorchuk_erschler", "odometer", "gupta_sidki3"])
def test_nucleus_is_closed_under_sections(name):
    context = load_context(name)
    nucleus = context.nucleus
    for n in nucleus:
        for x in context.letters:
            assert nucleus.index_of(nucleus.step(n, x)) is not None


def test_identity_comes_first(grigorchuk):
    nucleus = grigorchuk.nucleus
    assert nucleus.identity.is_empty
    assert nucleus.identity not in nucleus.non_identity()
    assert nucleus.name_of(nucleus.by_name("d")) == "d"


def test_nucleus_step_reads_the_transition_table(grigorchuk):
    nucleus = grigorchuk.nucleus
    b, d = nucleus.by_name("b"), nucleus.by_name("d")
    assert nucleus.name_of(nucleus_step(nucleus, b, 0)) == "a"
    assert nucleus.name_of(nucleus_step(nucleus, b, 1)) == "c"
    assert nucleus_step(nucleus, d, 0).is_empty
    with pytest.raises(KeyError):
        nucleus_step(nucleus, grigorchuk.element("a.b"), 0)


def test_contraction_depth_is_recorded(grigorchuk):
    certificate = grigorchuk.certificate
    assert certificate.nucleus is grigorchuk.nucleus
    assert certificate.contraction_depth >= 1


def test_small_budget_is_inconclusive(grigorchuk):
    with pytest.raises(Inconclusive):
        compute_nucleus(grigorchuk.automaton, NucleusBudget(max_elems=3))


@pytest.mark.parametrize("name", ["grigorchuk", "grigorchuk_erschler", "odometer", "gupta_sidki3"])
def test_nucleus_is_closed_under_inverses(name):
    nucleus = load_context(name).nucleus
    for n in nucleus:
        assert n.inverse() in nucleus, str(n)


@pytest.mark.parametrize("name", ["grigorchuk", "grigorchuk_erschler", "odometer", "gupta_sidki3"])
def test_sections_along_words_stay_in_the_nucleus(name):
    context = load_context(name)
    nucleus = context.nucleus
    automaton = context.automaton
    depth = context.certificate.contraction_depth
    for n in nucleus:
        for length in range(depth + 3):
            for word in itertools.product(automaton.letters, repeat=length):
                assert automaton.section(n, word) in nucleus, f"{n}|{word}"
    for left, right in itertools.product(nucleus, repeat=2):
        for word in itertools.product(automaton.letters, repeat=depth):
            assert automaton.section(left * right, word) in nucleus, f"{left}*{right}|{word}"


def test_grigorchuk_nucleus_is_minimal(grigorchuk):
    nucleus = grigorchuk.nucleus
    for removed in nucleus.names:
        reached = {
            nucleus.names[target]
            for index, name in enumerate(nucleus.names)
            if name != removed
            for target in nucleus.transitions[index]
        }
        assert removed in reached, removed
