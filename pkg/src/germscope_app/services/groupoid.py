from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .automaton import BudgetExceeded, EvPeriodicWord, FiniteWord, GermscopeError, GroupElement, all_words
from .context import GroupContext
from .regsets import (
    EVERYWHERE,
    TF,
    Complement,
    Cylinder,
    Intersection,
    ProductAutomaton,
    Region,
    TFClass,
    Union,
    tf_classify,
)

logger = logging.getLogger("germscope_app.groupoid")


class IncompatibleBase(GermscopeError):
    """Raised when a germ's base point does not lie in the source of its arrow."""


# Cells ---------------------------------------------------------------------


def _prefix_free(words: Iterable[Sequence[int]]) -> Tuple[FiniteWord, ...]:
    kept: List[FiniteWord] = []
    for word in sorted({tuple(w) for w in words}, key=lambda w: (len(w), w)):
        if not any(word[: len(prefix)] == prefix for prefix in kept):
            kept.append(word)
    return tuple(sorted(kept))


def residual_tails(tails: Sequence[FiniteWord], z: Sequence[int]) -> Tuple[FiniteWord, ...]:
    """Tails of ``tails`` inside the cylinder ``z``, re-rooted at ``z``."""
    z = tuple(z)
    rest: List[FiniteWord] = []
    for word in tails:
        if z[: len(word)] == word:
            return ((),)
        if word[: len(z)] == z:
            rest.append(word[len(z):])
    return _prefix_free(rest)


def intersect_tails(tails: Sequence[FiniteWord], cylinder: Sequence[int]) -> Tuple[FiniteWord, ...]:
    cylinder = tuple(cylinder)
    return tuple(cylinder + tail for tail in residual_tails(tails, cylinder))


@dataclass(frozen=True)
class Cell:
    """Compact open bisection ``{[u g v*, v w ξ] : w ∈ tails}``."""

    u: FiniteWord
    g: GroupElement
    v: FiniteWord
    tails: Tuple[FiniteWord, ...] = ((),)

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", tuple(self.u))
        object.__setattr__(self, "v", tuple(self.v))
        object.__setattr__(self, "tails", _prefix_free(self.tails))

    def normalized(self, alphabet_size: int) -> "Cell":
        tails = set(self.tails)
        merged = True
        while merged:
            merged = False
            for word in sorted(tails, key=len, reverse=True):
                if not word:
                    continue
                parent = word[:-1]
                siblings = {parent + (x,) for x in range(alphabet_size)}
                if siblings <= tails:
                    tails = (tails - siblings) | {parent}
                    merged = True
                    break
        return Cell(self.u, self.g, self.v, tuple(tails))

    def source_contains(self, point: EvPeriodicWord) -> bool:
        return any(point.starts_with(self.v + tail) for tail in self.tails)

    def basic_pieces(self, context: GroupContext) -> List["Cell"]:
        automaton = context.automaton
        return [
            Cell(self.u + automaton.act_word(self.g, tail), automaton.section(self.g, tail), self.v + tail)
            for tail in self.tails
        ]

    def describe(self, context: GroupContext) -> str:
        tails = ",".join("".join(map(str, t)) for t in self.tails)
        u = "".join(map(str, self.u))
        v = "".join(map(str, self.v))
        return f"[{u}|{context.automaton.format_element(self.g)}|{v}|{tails}]"


@dataclass(frozen=True)
class CompactOpenSet:
    cells: Tuple[Cell, ...] = ()

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def contains_germ(self, context: GroupContext, germ: "Germ") -> bool:
        return any(cell_contains(context, cell, germ) for cell in self.cells)


def _compose_basic(context: GroupContext, first: Cell, second: Cell) -> Optional[Cell]:
    automaton = context.automaton
    if second.u[: len(first.v)] == first.v:
        z = second.u[len(first.v):]
        return Cell(first.u + automaton.act_word(first.g, z), automaton.section(first.g, z) * second.g, second.v)
    if first.v[: len(second.u)] == second.u:
        z = first.v[len(second.u):]
        z_bar = automaton.act_word(second.g.inverse(), z)
        return Cell(first.u, first.g * automaton.section(second.g, z_bar), second.v + z_bar)
    return None


def compose_cells(context: GroupContext, first: Cell, second: Cell) -> CompactOpenSet:
    """Product ``first ∘ second`` of two bisections; ``second`` acts first."""
    composed: List[Cell] = []
    for left in first.basic_pieces(context):
        for right in second.basic_pieces(context):
            cell = _compose_basic(context, left, right)
            if cell is not None:
                composed.append(cell)
    return CompactOpenSet(tuple(composed))


def invert_cell(context: GroupContext, cell: Cell) -> Cell:
    automaton = context.automaton
    return Cell(cell.v, cell.g.inverse(), cell.u, tuple(automaton.act_word(cell.g, tail) for tail in cell.tails))


# Germs ---------------------------------------------------------------------


@dataclass(frozen=True)
class Germ:
    base: EvPeriodicWord
    u: FiniteWord
    g: GroupElement
    v: FiniteWord

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", tuple(self.u))
        object.__setattr__(self, "v", tuple(self.v))
        if not self.base.starts_with(self.v):
            raise IncompatibleBase(f"point {self.base} does not start with {''.join(map(str, self.v))}")


def _aligned(context: GroupContext, germ: Germ, depth: int) -> Tuple[FiniteWord, GroupElement]:
    z = germ.base.take(depth)[len(germ.v):]
    automaton = context.automaton
    return germ.u + automaton.act_word(germ.g, z), automaton.section(germ.g, z)


def germ_equal(context: GroupContext, first: Germ, second: Germ) -> bool:
    if first.base != second.base:
        return False
    depth = max(len(first.v), len(second.v))
    u1, g1 = _aligned(context, first, depth)
    u2, g2 = _aligned(context, second, depth)
    if u1 != u2:
        return False
    return tf_classify(context.regions, g2.inverse() * g1, first.base.drop(depth)) is TFClass.INTERIOR


def range_point(context: GroupContext, germ: Germ) -> EvPeriodicWord:
    tail = germ.base.drop(len(germ.v))
    return context.automaton.act_point(germ.g, tail).prepend(germ.u)


def invert_germ(context: GroupContext, germ: Germ) -> Germ:
    return Germ(range_point(context, germ), germ.v, germ.g.inverse(), germ.u)


def compose_germs(context: GroupContext, first: Germ, second: Germ) -> Germ:
    """Germ of ``first ∘ second`` at the base of ``second``."""
    if range_point(context, second) != first.base:
        raise IncompatibleBase("germs are not composable: range and base points differ")
    cell = _compose_basic(context, Cell(first.u, first.g, first.v), Cell(second.u, second.g, second.v))
    if cell is None:
        raise IncompatibleBase("germs are not composable: prefixes are incomparable")
    return Germ(second.base, cell.u, cell.g, cell.v)


def cell_germ(cell: Cell, point: EvPeriodicWord) -> Germ:
    return Germ(point, cell.u, cell.g, cell.v)


def cell_contains(context: GroupContext, cell: Cell, germ: Germ) -> bool:
    if not cell.source_contains(germ.base):
        return False
    return germ_equal(context, cell_germ(cell, germ.base), germ)


# Frames and germ patterns ---------------------------------------------------


@dataclass(frozen=True)
class FramedCell:
    index: int
    u: FiniteWord
    g: GroupElement
    tails: Tuple[FiniteWord, ...]


@dataclass(frozen=True)
class Frame:
    v: FiniteWord
    cells: Tuple[FramedCell, ...]


def localize(context: GroupContext, cells: Sequence[Cell], extra_depth: int = 0) -> List[Frame]:
    """Rewrite every cell over the common source depth and group the pieces by source prefix."""
    if not cells:
        return []
    automaton = context.automaton
    depth = max(len(cell.v) for cell in cells) + extra_depth
    grouped: Dict[FiniteWord, List[FramedCell]] = {}
    for index, cell in enumerate(cells):
        for z in all_words(automaton.alphabet_size, depth - len(cell.v)):
            rest = residual_tails(cell.tails, z)
            if not rest:
                continue
            grouped.setdefault(cell.v + z, []).append(
                FramedCell(index, cell.u + automaton.act_word(cell.g, z), automaton.section(cell.g, z), rest)
            )
    return [Frame(v, tuple(pieces)) for v, pieces in sorted(grouped.items())]


class GermPatterns:
    """Coincidence analysis of the germs of one frame's cells.

    At a point ``v ξ`` two pieces share a germ exactly when their range prefixes
    agree and ``ξ ∈ TF_{g_j⁻¹ g_i}``. The product automaton over those pair atoms
    (and the pieces' source cylinders) has one coincidence pattern per
    accepted-atom set.
    """

    def __init__(self, context: GroupContext, frame: Frame) -> None:
        self.context = context
        self.frame = frame
        cells = frame.cells
        common = {cell.tails for cell in cells}
        if len(common) == 1 and len(next(iter(common))) == 1:
            self.start: FiniteWord = next(iter(common))[0]
            shared = True
        else:
            self.start = ()
            shared = False

        self.atoms: List[Region] = []
        self._atom_index: Dict[Region, int] = {}
        self._sources: List[Tuple[int, ...]] = []
        for cell in cells:
            if shared:
                self._sources.append(())
            else:
                self._sources.append(tuple(self._atom(Cylinder(tail)) for tail in cell.tails))
        self._pairs: Dict[Tuple[int, int], int] = {}
        for i, j in itertools.combinations(range(len(cells)), 2):
            if cells[i].u == cells[j].u:
                relative = context.canonical(cells[j].g.inverse() * cells[i].g)
                self._pairs[(i, j)] = self._atom(TF(relative))
        self.product: ProductAutomaton = context.regions.product(self.atoms, self.start)

    def _atom(self, atom: Region) -> int:
        if atom not in self._atom_index:
            self._atom_index[atom] = len(self.atoms)
            self.atoms.append(atom)
        return self._atom_index[atom]

    @property
    def ambient(self) -> FiniteWord:
        return self.frame.v + self.start

    def present(self, accepted: FrozenSet[int]) -> List[int]:
        return [
            i for i, sources in enumerate(self._sources) if not sources or any(a in accepted for a in sources)
        ]

    def classes(self, accepted: FrozenSet[int]) -> List[FrozenSet[int]]:
        present = self.present(accepted)
        parent = {i: i for i in present}

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for (i, j), atom in self._pairs.items():
            if i in parent and j in parent and atom in accepted:
                parent[find(i)] = find(j)
        grouped: Dict[int, List[int]] = {}
        for i in present:
            grouped.setdefault(find(i), []).append(i)
        return sorted((frozenset(group) for group in grouped.values()), key=lambda s: sorted(s))

    def limit_patterns(self, node=None) -> List[FrozenSet[int]]:
        return sorted(self.product.limit_patterns(node), key=sorted)

    def bottom_patterns(self, node=None) -> List[FrozenSet[int]]:
        return sorted(self.product.bottom_patterns(node), key=sorted)

    def region_for(self, accepted: FrozenSet[int]) -> Region:
        parts: List[Region] = []
        for index, atom in enumerate(self.atoms):
            parts.append(atom if index in accepted else Complement(atom))
        return Intersection(tuple(parts)) if parts else EVERYWHERE

    def sample_for(self, accepted: FrozenSet[int]) -> Optional[EvPeriodicWord]:
        node = self.product.cyclic_node(lambda pattern: pattern == accepted)
        if node is None:
            return None
        return self.product.sample(node).prepend(self.ambient)


# Dangerous points and fibers -------------------------------------------------


def is_dangerous(context: GroupContext, point: EvPeriodicWord) -> Tuple[bool, List[Tuple[int, GroupElement]]]:
    witnesses: List[Tuple[int, GroupElement]] = []
    for depth in range(len(point.prefix) + len(point.period)):
        tail = point.drop(depth)
        for n in context.nucleus.non_identity():
            if tf_classify(context.regions, n, tail) is TFClass.BOUNDARY:
                witnesses.append((depth, n))
    return bool(witnesses), witnesses


def _boundary_members(context: GroupContext, tail: EvPeriodicWord) -> List[GroupElement]:
    members: List[GroupElement] = []
    for n in context.nucleus.non_identity():
        if tf_classify(context.regions, n, tail) is not TFClass.BOUNDARY:
            continue
        if any(tf_classify(context.regions, m.inverse() * n, tail) is TFClass.INTERIOR for m in members):
            continue
        members.append(n)
    return members


def stabilized_depth(context: GroupContext, point: EvPeriodicWord) -> Tuple[int, List[GroupElement]]:
    """Least depth at which the boundary germs over ``point`` stop growing, with those germs."""
    # Scan one full period past the preperiod; later tails repeat a phase already seen.
    horizon = len(point.prefix) + len(point.period)
    by_depth = [_boundary_members(context, point.drop(depth)) for depth in range(horizon)]
    final = max(len(members) for members in by_depth)
    depth = next(d for d, members in enumerate(by_depth) if len(members) == final)
    return depth, [context.nucleus.identity] + by_depth[depth]


@dataclass(frozen=True)
class PhasePattern:
    depth: int
    tracked: Tuple[GroupElement, ...]
    word: FiniteWord
    open: bool
    sample: EvPeriodicWord


@dataclass(frozen=True)
class CoverPoint:
    """Cover point ``{[ω_L m ω_L*, ω] : m ∈ members}`` over a boundary point."""

    base: EvPeriodicWord
    depth: int
    members: Tuple[GroupElement, ...]
    tracked: Tuple[GroupElement, ...] = field(default=(), compare=False)
    phases: Tuple[Tuple[int, Tuple[GroupElement, ...]], ...] = field(default=(), compare=False)
    selection: FrozenSet[int] = field(default=frozenset(), compare=False)

    @property
    def size(self) -> int:
        return len(self.members)


def _tracked_phases(
    context: GroupContext, point: EvPeriodicWord, depth: int, members: Sequence[GroupElement]
) -> List[Tuple[int, Tuple[GroupElement, ...]]]:
    nucleus = context.nucleus
    start = max(depth, len(point.prefix))
    vector = tuple(members)
    for index in range(depth, start):
        vector = tuple(nucleus.step(m, point.letter(index)) for m in vector)
    seen: Dict[Tuple[int, Tuple[GroupElement, ...]], int] = {}
    phases: List[Tuple[int, Tuple[GroupElement, ...]]] = []
    index = start
    while (point.phase(index), vector) not in seen:
        seen[(point.phase(index), vector)] = len(phases)
        phases.append((index, vector))
        vector = tuple(nucleus.step(m, point.letter(index)) for m in vector)
        index += 1
    return phases[seen[(point.phase(index), vector)]:]


def _phase_product(context: GroupContext, tracked: Sequence[GroupElement]) -> ProductAutomaton:
    return context.regions.product([TF(m) for m in tracked])


def fiber(context: GroupContext, point: EvPeriodicWord) -> List[CoverPoint]:
    depth, members = stabilized_depth(context, point)
    nontrivial = tuple(members[1:])
    phases = tuple(_tracked_phases(context, point, depth, nontrivial))
    identity = context.nucleus.identity
    if not nontrivial:
        return [CoverPoint(point, depth, (identity,), (), phases, frozenset())]

    families = [_phase_product(context, tracked).limit_patterns() for _, tracked in phases]
    points: List[CoverPoint] = []
    for size in range(len(nontrivial) + 1):
        for chosen in itertools.combinations(range(len(nontrivial)), size):
            selection = frozenset(chosen)
            if all(selection in family for family in families):
                points.append(
                    CoverPoint(
                        point,
                        depth,
                        (identity,) + tuple(nontrivial[i] for i in chosen),
                        nontrivial,
                        phases,
                        selection,
                    )
                )
    logger.debug("Fiber over %s has %d cover points", point, len(points))
    return points


def realizing_pattern(context: GroupContext, cover_point: CoverPoint) -> List[PhasePattern]:
    """Per phase, a word ``w`` such that points ``ω_l w …`` converge to the cover point."""
    patterns: List[PhasePattern] = []
    for index, tracked in cover_point.phases:
        if not tracked:
            tail = cover_point.base.drop(index)
            patterns.append(PhasePattern(index, (), (), True, tail))
            continue
        product = _phase_product(context, tracked)
        target = cover_point.selection
        settled = next(
            (
                node
                for node in product.nodes_by_distance()
                if product.is_settled(node) and product.accepted(node) == target
            ),
            None,
        )
        if settled is not None:
            word = product.path(product.root, settled)
            cycle = product.cyclic_node(lambda accepted: True, settled)
            patterns.append(PhasePattern(index, tracked, word, True, product.sample(cycle)))
            continue
        cycle = product.cyclic_node(lambda accepted: accepted == target)
        word = product.path(product.root, cycle)
        patterns.append(PhasePattern(index, tracked, word, False, product.sample(cycle)))
    return patterns


# Regular open sets and the singular cover part ----------------------------------


def _nonregular_branch(context: GroupContext, frame: Frame) -> Optional[Tuple[FiniteWord, GroupElement, FiniteWord]]:
    by_range: Dict[FiniteWord, List[FramedCell]] = {}
    for cell in frame.cells:
        by_range.setdefault(cell.u, []).append(cell)
    nucleus = context.nucleus
    for u, pieces in by_range.items():
        candidates: List[GroupElement] = []
        for piece in pieces:
            for n in nucleus:
                h = context.canonical(piece.g * n)
                if h not in candidates:
                    candidates.append(h)
        for h in candidates:
            region = Union(
                tuple(
                    Intersection((Union(tuple(Cylinder(t) for t in piece.tails)), TF(h.inverse() * piece.g)))
                    for piece in pieces
                )
            )
            found = context.regions.compile(region).nonregular_cylinder()
            if found is not None:
                return u, h, found[0]
    return None


def regular_open(context: GroupContext, compact_open: CompactOpenSet, depth: Optional[int] = None) -> bool:
    depth = context.budgets.regular_open_depth if depth is None else depth
    cells = list(compact_open.cells)
    if not cells:
        return True
    for extra in range(depth + 1):
        for frame in localize(context, cells, extra):
            if _nonregular_branch(context, frame) is not None:
                return False
    return True


def find_nonregular_witness(context: GroupContext, depth: Optional[int] = None) -> Optional[CompactOpenSet]:
    depth = context.budgets.regular_open_depth if depth is None else depth
    nontrivial = context.nucleus.non_identity()
    for length in range(depth + 1):
        for v in all_words(context.automaton.alphabet_size, length):
            for size in range(1, len(nontrivial) + 1):
                for chosen in itertools.combinations(nontrivial, size):
                    candidate = CompactOpenSet(tuple(Cell(v, n, v) for n in chosen))
                    if not regular_open(context, candidate, depth=0):
                        logger.info("Found a compact open set that is not regular open at depth %d", length)
                        return candidate
    return None


class D0Verdict(Enum):
    EMPTY = "empty"
    NONEMPTY = "nonempty"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class D0Witness:
    cylinder: FiniteWord
    elements: Tuple[GroupElement, ...]
    point: EvPeriodicWord


@dataclass(frozen=True)
class D0Status:
    verdict: D0Verdict
    witness: Optional[D0Witness]
    subsets_checked: int
    hausdorff: bool
    nonregular_witness: Optional[CompactOpenSet] = None


def is_hausdorff(context: GroupContext) -> bool:
    return not any(context.regions.sf_automaton(n).has_boundary() for n in context.nucleus.non_identity())


def d0_status(context: GroupContext, depth: Optional[int] = None, max_subsets: Optional[int] = None) -> D0Status:
    """Decide whether some cylinder carries a dense, non-full union of nucleus fixed sets."""
    depth = context.budgets.d0_depth if depth is None else depth
    max_subsets = context.budgets.d0_max_subsets if max_subsets is None else max_subsets
    hausdorff = is_hausdorff(context)
    if hausdorff:
        return D0Status(D0Verdict.EMPTY, None, 0, True)

    nontrivial = context.nucleus.non_identity()
    checked = 0
    for size in range(1, len(nontrivial) + 1):
        for chosen in itertools.combinations(nontrivial, size):
            if checked >= max_subsets:
                logger.warning("D0 search stopped after %d subsets", checked)
                return D0Status(D0Verdict.INCONCLUSIVE, None, checked, False)
            checked += 1
            try:
                found = context.regions.compile(Union(tuple(TF(n) for n in chosen))).nonregular_cylinder()
            except BudgetExceeded as exc:
                logger.warning("D0 search hit a region budget: %s", exc)
                return D0Status(D0Verdict.INCONCLUSIVE, None, checked, False)
            if found is not None:
                cylinder, point = found
                witness = D0Witness(cylinder, tuple(chosen), point)
                nonregular = find_nonregular_witness(context, depth)
                return D0Status(D0Verdict.NONEMPTY, witness, checked, False, nonregular)
    return D0Status(D0Verdict.EMPTY, None, checked, False)
