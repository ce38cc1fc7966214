from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .automaton import Automaton, ElementTable, GermscopeError, GroupElement

logger = logging.getLogger("germscope_app.nucleus")


class Inconclusive(GermscopeError):
    """Raised when the nucleus search runs out of budget before closing up."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class NucleusBudget:
    max_elems: int = 512
    max_depth: int = 64


@dataclass(frozen=True)
class _SectionLayers:
    layers: Tuple[FrozenSet[int], ...]
    cycle_start: int

    @property
    def deep(self) -> FrozenSet[int]:
        return frozenset().union(*self.layers[self.cycle_start:])

    def settled_depth(self, members: Set[int]) -> int:
        depth = len(self.layers)
        while depth > 0 and self.layers[depth - 1] <= members:
            depth -= 1
        return depth


class Nucleus:
    """Section-closed, inverse-closed finite set of canonical elements with its transition table."""

    def __init__(
        self,
        table: ElementTable,
        ids: Sequence[int],
        names: Sequence[str],
    ) -> None:
        self._table = table
        self._ids: Tuple[int, ...] = tuple(ids)
        self._position: Dict[int, int] = {element_id: pos for pos, element_id in enumerate(self._ids)}
        self.names: Tuple[str, ...] = tuple(names)
        self.elements: Tuple[GroupElement, ...] = tuple(table.representative(i) for i in self._ids)
        automaton = table.automaton
        self.permutations: Tuple[Tuple[int, ...], ...] = tuple(
            automaton.letter_permutation(element) for element in self.elements
        )
        self.transitions: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(self._position[table.intern(automaton.section(element, (x,)))] for x in automaton.letters)
            for element in self.elements
        )

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, g: object) -> bool:
        return isinstance(g, GroupElement) and self.index_of(g) is not None

    @property
    def identity(self) -> GroupElement:
        return GroupElement()

    def non_identity(self) -> Tuple[GroupElement, ...]:
        return tuple(element for element in self.elements if not element.is_empty)

    def index_of(self, g: GroupElement) -> Optional[int]:
        return self._position.get(self._table.intern(g))

    def name_of(self, g: GroupElement) -> str:
        index = self.index_of(g)
        if index is None:
            raise KeyError(f"{g} is not a nucleus element")
        return self.names[index]

    def by_name(self, name: str) -> GroupElement:
        return self.elements[self.names.index(name)]

    def step(self, g: GroupElement, x: int) -> GroupElement:
        index = self.index_of(g)
        if index is None:
            raise KeyError(f"{g} is not a nucleus element")
        return self.elements[self.transitions[index][x]]


@dataclass(frozen=True)
class ContractionCertificate:
    nucleus: Nucleus
    contraction_depth: int


def nucleus_step(nucleus: Nucleus, n: GroupElement, x: int) -> GroupElement:
    return nucleus.step(n, x)


def _section_layers(table: ElementTable, g: GroupElement, max_depth: int) -> _SectionLayers:
    automaton = table.automaton
    layer = frozenset({table.intern(g)})
    seen: Dict[FrozenSet[int], int] = {layer: 0}
    layers: List[FrozenSet[int]] = [layer]
    while True:
        if len(layers) > max_depth:
            raise Inconclusive(f"section layers of {g} did not cycle within depth {max_depth}")
        layer = frozenset(
            table.intern(automaton.section(table.representative(i), (x,)))
            for i in layer
            for x in automaton.letters
        )
        if layer in seen:
            return _SectionLayers(tuple(layers), seen[layer])
        seen[layer] = len(layers)
        layers.append(layer)


def _element_names(table: ElementTable, ids: Sequence[int]) -> List[str]:
    automaton = table.automaton
    known: Dict[int, str] = {table.intern(GroupElement()): automaton.identity}
    for name in automaton.generators:
        known.setdefault(table.intern(automaton.state_element(name)), name)
    for name in automaton.generators:
        known.setdefault(table.intern(automaton.state_element(name).inverse()), f"{name}'")

    names: List[str] = []
    fresh = 0
    for element_id in ids:
        if element_id in known:
            names.append(known[element_id])
        else:
            names.append(f"n{fresh}")
            fresh += 1
    return names


def compute_nucleus(
    automaton: Automaton,
    budget: NucleusBudget = NucleusBudget(),
    table: Optional[ElementTable] = None,
) -> ContractionCertificate:
    table = table or ElementTable(automaton)

    order: List[int] = []
    members: Set[int] = set()

    def admit(element_id: int) -> bool:
        if element_id in members:
            return False
        if len(members) >= budget.max_elems:
            raise Inconclusive(f"more than {budget.max_elems} candidate elements; automaton may not be contracting")
        members.add(element_id)
        order.append(element_id)
        return True

    admit(table.intern(GroupElement()))
    for name in automaton.generators:
        admit(table.intern(automaton.state_element(name)))
    for name in automaton.generators:
        admit(table.intern(automaton.state_element(name).inverse()))

    layer_cache: Dict[Tuple[int, int], _SectionLayers] = {}
    deep: Set[int] = set()
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        for left in list(order):
            for right in list(order):
                key = (left, right)
                if key not in layer_cache:
                    product = table.representative(left) * table.representative(right)
                    layer_cache[key] = _section_layers(table, product, budget.max_depth)
                for element_id in layer_cache[key].deep:
                    deep.add(element_id)
                    if admit(element_id):
                        changed = True

    nucleus_ids = [element_id for element_id in order if element_id in deep]
    nucleus_set = set(nucleus_ids)
    contraction_depth = 0
    for left in nucleus_ids:
        for right in nucleus_ids:
            contraction_depth = max(contraction_depth, layer_cache[(left, right)].settled_depth(nucleus_set))

    nucleus = Nucleus(table, nucleus_ids, _element_names(table, nucleus_ids))
    logger.info(
        "Nucleus closed after %d rounds: %d elements, contraction depth %d",
        rounds,
        len(nucleus),
        contraction_depth,
    )
    return ContractionCertificate(nucleus=nucleus, contraction_depth=contraction_depth)
