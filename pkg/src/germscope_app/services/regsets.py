"""Regular sets of the boundary: fixed-word automata, regions and their decisions.

A region is a boolean combination of open sets ``TF_g`` and cylinders inside an
ambient cylinder. Regions compile to a product of per-atom automata in which
acceptance is absorbing, so an atom's truth value is constant on every strongly
connected component. Every decision below reads the accepted-atom sets of
cyclic components ("limit patterns") and of terminal components ("bottom
patterns").
"""
from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union as TypingUnion

import networkx as nx

from .automaton import BudgetExceeded, ElementTable, EvPeriodicWord, FiniteWord, GroupElement

logger = logging.getLogger("germscope_app.regsets")


class Mark(Enum):
    ACCEPT = "accept"
    DEAD = "dead"

    def __str__(self) -> str:
        return self.value


ACCEPT = Mark.ACCEPT
DEAD = Mark.DEAD

SFState = TypingUnion[GroupElement, Mark]


class TFClass(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


# Fixed-word automata -------------------------------------------------------


class SFAutomaton:
    """Automaton accepting ``SF_g``: words fixed by ``g`` with trivial section."""

    def __init__(self, owner: GroupElement, table: ElementTable, max_states: int) -> None:
        automaton = table.automaton
        self.owner = owner
        self.graph = nx.DiGraph()
        self._delta: Dict[SFState, Tuple[SFState, ...]] = {}

        canonical = table.canonical(owner)
        self.start: SFState = ACCEPT if canonical.is_empty else canonical

        queue = deque([self.start])
        self.graph.add_node(self.start)
        while queue:
            state = queue.popleft()
            targets: List[SFState] = []
            for x in automaton.letters:
                if isinstance(state, Mark):
                    target: SFState = state
                elif automaton.letter_permutation(state)[x] != x:
                    target = DEAD
                else:
                    section = table.canonical(automaton.section(state, (x,)))
                    target = ACCEPT if section.is_empty else section
                targets.append(target)
                if target not in self.graph:
                    self.graph.add_node(target)
                    queue.append(target)
                if not self.graph.has_edge(state, target):
                    self.graph.add_edge(state, target, letter=x)
            self._delta[state] = tuple(targets)
            if len(self._delta) > max_states:
                raise BudgetExceeded(f"fixed-word automaton of {owner}", max_states)

        if ACCEPT in self.graph:
            self.coaccessible: FrozenSet[SFState] = frozenset(nx.ancestors(self.graph, ACCEPT) | {ACCEPT})
        else:
            self.coaccessible = frozenset()

    @property
    def states(self) -> List[SFState]:
        return list(self.graph.nodes)

    @property
    def dead_states(self) -> List[SFState]:
        return [state for state in self.graph.nodes if state not in self.coaccessible]

    @property
    def is_empty(self) -> bool:
        return self.start not in self.coaccessible

    def step(self, state: SFState, x: int) -> SFState:
        return self._delta[state][x]

    def run(self, word: Sequence[int], state: Optional[SFState] = None) -> SFState:
        state = self.start if state is None else state
        for x in word:
            state = self._delta[state][x]
        return state

    def accepts(self, word: Sequence[int]) -> bool:
        return self.run(word) is ACCEPT

    def has_boundary(self) -> bool:
        """True when some infinite path stays inside live, non-accepting states."""
        live = [state for state in self.coaccessible if state is not ACCEPT]
        return not nx.is_directed_acyclic_graph(self.graph.subgraph(live))

    def accepted_words(self, max_length: int) -> List[FiniteWord]:
        """Minimal accepted words up to ``max_length``, shortest first."""
        if self.start is ACCEPT:
            return [()]
        found: List[FiniteWord] = []
        frontier: List[Tuple[FiniteWord, SFState]] = [((), self.start)]
        for _ in range(max_length):
            following: List[Tuple[FiniteWord, SFState]] = []
            for word, state in frontier:
                for x, target in enumerate(self._delta[state]):
                    if target is ACCEPT:
                        found.append(word + (x,))
                    elif target in self.coaccessible:
                        following.append((word + (x,), target))
            frontier = following
        return found


def tf_classify_with(sf: SFAutomaton, point: EvPeriodicWord) -> TFClass:
    state = sf.start
    index = 0
    seen: Set[Tuple[SFState, int]] = set()
    while True:
        if state is ACCEPT:
            return TFClass.INTERIOR
        if state not in sf.coaccessible:
            return TFClass.OUTSIDE
        if index >= len(point.prefix):
            key = (state, point.phase(index))
            if key in seen:
                return TFClass.BOUNDARY
            seen.add(key)
        state = sf.step(state, point.letter(index))
        index += 1


# Region expressions --------------------------------------------------------


class Region:
    """Boolean expression over ``TF`` and ``Cylinder`` atoms."""

    def atoms(self) -> Iterator["Region"]:
        raise NotImplementedError

    def holds(self, truth: Callable[["Region"], bool]) -> bool:
        raise NotImplementedError

    def __or__(self, other: "Region") -> "Region":
        return Union((self, other))

    def __and__(self, other: "Region") -> "Region":
        return Intersection((self, other))

    def __sub__(self, other: "Region") -> "Region":
        return Intersection((self, Complement(other)))

    def __invert__(self) -> "Region":
        return Complement(self)


@dataclass(frozen=True)
class TF(Region):
    """Points whose tail after ``after`` lies in ``TF_element``."""

    element: GroupElement
    after: FiniteWord = ()

    def atoms(self) -> Iterator[Region]:
        yield self

    def holds(self, truth: Callable[[Region], bool]) -> bool:
        return truth(self)

    def __str__(self) -> str:
        suffix = f"@{''.join(map(str, self.after))}" if self.after else ""
        return f"TF[{self.element}{suffix}]"


@dataclass(frozen=True)
class Cylinder(Region):
    prefix: FiniteWord

    def atoms(self) -> Iterator[Region]:
        yield self

    def holds(self, truth: Callable[[Region], bool]) -> bool:
        return truth(self)

    def __str__(self) -> str:
        return f"{''.join(map(str, self.prefix))}X"


@dataclass(frozen=True)
class Union(Region):
    parts: Tuple[Region, ...]

    def atoms(self) -> Iterator[Region]:
        for part in self.parts:
            yield from part.atoms()

    def holds(self, truth: Callable[[Region], bool]) -> bool:
        return any(part.holds(truth) for part in self.parts)

    def __str__(self) -> str:
        return "(" + " ∪ ".join(map(str, self.parts)) + ")" if self.parts else "∅"


@dataclass(frozen=True)
class Intersection(Region):
    parts: Tuple[Region, ...]

    def atoms(self) -> Iterator[Region]:
        for part in self.parts:
            yield from part.atoms()

    def holds(self, truth: Callable[[Region], bool]) -> bool:
        return all(part.holds(truth) for part in self.parts)

    def __str__(self) -> str:
        return "(" + " ∩ ".join(map(str, self.parts)) + ")" if self.parts else "X"


@dataclass(frozen=True)
class Complement(Region):
    part: Region

    def atoms(self) -> Iterator[Region]:
        yield from self.part.atoms()

    def holds(self, truth: Callable[[Region], bool]) -> bool:
        return not self.part.holds(truth)

    def __str__(self) -> str:
        return f"¬{self.part}"


EVERYWHERE: Region = Intersection(())
NOWHERE: Region = Union(())


# Product automata ----------------------------------------------------------


class _TFComponent:
    def __init__(self, sf: SFAutomaton, after: FiniteWord) -> None:
        self.sf = sf
        self.initial = self._settle(sf.run(after))

    def _settle(self, state: SFState) -> SFState:
        return state if state in self.sf.coaccessible else DEAD

    def step(self, state: SFState, x: int) -> SFState:
        if isinstance(state, Mark):
            return state
        return self._settle(self.sf.step(state, x))


class _CylinderComponent:
    def __init__(self, prefix: FiniteWord) -> None:
        self.prefix = prefix
        self.initial = ACCEPT if not prefix else 0

    def step(self, state, x: int):
        if isinstance(state, Mark):
            return state
        if self.prefix[state] != x:
            return DEAD
        return ACCEPT if state + 1 == len(self.prefix) else state + 1


ProductNode = Tuple[object, ...]


class ProductAutomaton:
    """Synchronous product of atom automata, explored from ``start``."""

    def __init__(self, components: Sequence[object], letters: range, start: FiniteWord, max_states: int) -> None:
        self._components = list(components)
        self.letters = letters
        node: ProductNode = tuple(component.initial for component in self._components)
        for x in start:
            node = self.step(node, x)
        self.root = node

        self.graph = nx.DiGraph()
        self.graph.add_node(self.root, accepted=self._accepted(self.root))
        queue = deque([self.root])
        while queue:
            current = queue.popleft()
            for x in letters:
                target = self.step(current, x)
                if target not in self.graph:
                    if self.graph.number_of_nodes() >= max_states:
                        raise BudgetExceeded("region product automaton", max_states)
                    self.graph.add_node(target, accepted=self._accepted(target))
                    queue.append(target)
                if not self.graph.has_edge(current, target):
                    self.graph.add_edge(current, target, letter=x)

        self._condensation = nx.condensation(self.graph)
        self._component_of: Dict[ProductNode, int] = self._condensation.graph["mapping"]
        self._cyclic: Set[int] = set()
        self._pattern: Dict[int, FrozenSet[int]] = {}
        for component, data in self._condensation.nodes(data=True):
            members = data["members"]
            sample = next(iter(members))
            self._pattern[component] = self.graph.nodes[sample]["accepted"]
            if len(members) > 1 or self.graph.has_edge(sample, sample):
                self._cyclic.add(component)
        self._bottom: Set[int] = {c for c in self._condensation if self._condensation.out_degree(c) == 0}
        self._reach_cache: Dict[int, FrozenSet[int]] = {}

    def _accepted(self, node: ProductNode) -> FrozenSet[int]:
        return frozenset(i for i, state in enumerate(node) if state is ACCEPT)

    def step(self, node: ProductNode, x: int) -> ProductNode:
        return tuple(component.step(state, x) for component, state in zip(self._components, node))

    def run(self, word: Sequence[int], node: Optional[ProductNode] = None) -> ProductNode:
        node = self.root if node is None else node
        for x in word:
            node = self.step(node, x)
        return node

    def accepted(self, node: ProductNode) -> FrozenSet[int]:
        return self.graph.nodes[node]["accepted"]

    def is_settled(self, node: ProductNode) -> bool:
        return all(isinstance(state, Mark) for state in node)

    def _reachable(self, node: Optional[ProductNode]) -> FrozenSet[int]:
        component = self._component_of[self.root if node is None else node]
        cached = self._reach_cache.get(component)
        if cached is None:
            cached = frozenset(nx.descendants(self._condensation, component) | {component})
            self._reach_cache[component] = cached
        return cached

    def limit_patterns(self, node: Optional[ProductNode] = None) -> FrozenSet[FrozenSet[int]]:
        return frozenset(self._pattern[c] for c in self._reachable(node) if c in self._cyclic)

    def bottom_patterns(self, node: Optional[ProductNode] = None) -> FrozenSet[FrozenSet[int]]:
        return frozenset(self._pattern[c] for c in self._reachable(node) if c in self._bottom)

    def nodes_by_distance(self, node: Optional[ProductNode] = None) -> List[ProductNode]:
        source = self.root if node is None else node
        return list(nx.single_source_shortest_path_length(self.graph, source))

    def is_cyclic(self, node: ProductNode) -> bool:
        return self._component_of[node] in self._cyclic

    def cyclic_node(self, accept: Callable[[FrozenSet[int]], bool], node: Optional[ProductNode] = None) -> Optional[ProductNode]:
        """Closest node on a cycle whose accepted set satisfies ``accept``."""
        for candidate in self.nodes_by_distance(node):
            if self.is_cyclic(candidate) and accept(self.accepted(candidate)):
                return candidate
        return None

    def path(self, source: ProductNode, target: ProductNode) -> FiniteWord:
        nodes = nx.shortest_path(self.graph, source, target)
        return tuple(self.graph.edges[a, b]["letter"] for a, b in zip(nodes, nodes[1:]))

    def sample(self, target: ProductNode, source: Optional[ProductNode] = None) -> EvPeriodicWord:
        """Point whose run from ``source`` ends cycling through ``target``."""
        source = self.root if source is None else source
        lead = self.path(source, target)
        if self.graph.has_edge(target, target):
            return EvPeriodicWord(lead, (self.graph.edges[target, target]["letter"],))
        component = self._component_of[target]
        successor = next(n for n in self.graph.successors(target) if self._component_of[n] == component)
        loop = (self.graph.edges[target, successor]["letter"],) + self.path(successor, target)
        return EvPeriodicWord(lead, loop)


# Compiled regions ----------------------------------------------------------


@dataclass(frozen=True)
class RegionSample:
    point: EvPeriodicWord
    tail: EvPeriodicWord


class CompiledRegion:
    """A region compiled against a product automaton rooted at its ambient cylinder."""

    def __init__(self, region: Region, atoms: Sequence[Region], product: ProductAutomaton, ambient: FiniteWord) -> None:
        self.region = region
        self.atoms = tuple(atoms)
        self.product = product
        self.ambient = ambient
        self._index = {atom: i for i, atom in enumerate(self.atoms)}

    def holds(self, accepted: FrozenSet[int]) -> bool:
        return self.region.holds(lambda atom: self._index[atom] in accepted)

    def nonempty(self) -> bool:
        return any(self.holds(pattern) for pattern in self.product.limit_patterns())

    def sample(self) -> Optional[RegionSample]:
        node = self.product.cyclic_node(self.holds)
        if node is None:
            return None
        tail = self.product.sample(node)
        return RegionSample(point=tail.prepend(self.ambient), tail=tail)

    def empty_interior(self) -> bool:
        return not any(self.holds(pattern) for pattern in self.product.bottom_patterns())

    def dense_in(self, word: Sequence[int]) -> bool:
        word = tuple(word)
        if word[: len(self.ambient)] != self.ambient:
            return False
        node = self.product.run(word[len(self.ambient):])
        return all(self.holds(pattern) for pattern in self.product.bottom_patterns(node))

    def contains(self, point: EvPeriodicWord) -> bool:
        if not point.starts_with(self.ambient):
            return False
        tail = point.drop(len(self.ambient))
        node = self.product.root
        index = 0
        seen: Set[Tuple[ProductNode, int]] = set()
        while True:
            if index >= len(tail.prefix):
                key = (node, tail.phase(index))
                if key in seen:
                    return self.holds(self.product.accepted(node))
                seen.add(key)
            node = self.product.step(node, tail.letter(index))
            index += 1

    def nonregular_cylinder(self) -> Optional[Tuple[FiniteWord, EvPeriodicWord]]:
        """Shortest cylinder in which the region is dense without covering it.

        Returns the cylinder word (absolute) and a point of the cylinder outside
        the region.
        """
        for node in self.product.nodes_by_distance():
            if not all(self.holds(p) for p in self.product.bottom_patterns(node)):
                continue
            if all(self.holds(p) for p in self.product.limit_patterns(node)):
                continue
            word = self.product.path(self.product.root, node)
            outside = self.product.cyclic_node(lambda accepted: not self.holds(accepted), node)
            tail = self.product.sample(outside)
            return self.ambient + word, tail.prepend(self.ambient)
        return None


class RegionCompiler:
    """Compiles regions for one group, caching the fixed-word automaton of every element."""

    def __init__(self, table: ElementTable, max_states: int = 20000, logger: Optional[logging.Logger] = None) -> None:
        self.table = table
        self.max_states = max_states
        self.logger = logger or logging.getLogger("germscope_app.regsets")
        self._lock = threading.Lock()
        self._sf_cache: Dict[GroupElement, SFAutomaton] = {}

    @property
    def letters(self) -> range:
        return self.table.automaton.letters

    def sf_automaton(self, g: GroupElement) -> SFAutomaton:
        key = self.table.canonical(g)
        with self._lock:
            cached = self._sf_cache.get(key)
        if cached is not None:
            return cached
        built = SFAutomaton(g, self.table, self.max_states)
        with self._lock:
            self._sf_cache.setdefault(key, built)
        return built

    def _component(self, atom: Region):
        if isinstance(atom, TF):
            return _TFComponent(self.sf_automaton(atom.element), atom.after)
        if isinstance(atom, Cylinder):
            return _CylinderComponent(atom.prefix)
        raise TypeError(f"not an atom: {atom!r}")

    def product(self, atoms: Sequence[Region], start: FiniteWord = ()) -> ProductAutomaton:
        components = [self._component(atom) for atom in atoms]
        return ProductAutomaton(components, self.letters, tuple(start), self.max_states)

    def compile(self, region: Region, ambient: Sequence[int] = ()) -> CompiledRegion:
        atoms: List[Region] = []
        for atom in region.atoms():
            if atom not in atoms:
                atoms.append(atom)
        ambient = tuple(ambient)
        return CompiledRegion(region, atoms, self.product(atoms, ambient), ambient)


# Module operations ---------------------------------------------------------


def sf_automaton(compiler: RegionCompiler, g: GroupElement) -> SFAutomaton:
    return compiler.sf_automaton(g)


def tf_classify(compiler: RegionCompiler, g: GroupElement, point: EvPeriodicWord) -> TFClass:
    return tf_classify_with(compiler.sf_automaton(g), point)


def region_nonempty(compiler: RegionCompiler, region: Region, ambient: Sequence[int] = ()) -> Tuple[bool, Optional[EvPeriodicWord]]:
    compiled = compiler.compile(region, ambient)
    sample = compiled.sample()
    return sample is not None, sample.point if sample else None


def region_empty_interior(compiler: RegionCompiler, region: Region, ambient: Sequence[int] = ()) -> bool:
    return compiler.compile(region, ambient).empty_interior()


def region_dense_in(compiler: RegionCompiler, region: Region, word: Sequence[int], ambient: Sequence[int] = ()) -> bool:
    return compiler.compile(region, ambient).dense_in(word)
