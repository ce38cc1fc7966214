from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from sympy import primefactors
from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix

from .automaton import EvPeriodicWord, FiniteWord, GroupElement, all_words, level_orbit
from .context import Budgets, GroupContext
from .groupoid import Cell, Frame, FramedCell, GermPatterns
from .regsets import TF, Cylinder, Intersection
from .steinberg import AlgebraElement, RingTag, VerificationFailed, format_algebra, is_singular, is_zero, normalize

logger = logging.getLogger("germscope_app.scondition")


@dataclass(frozen=True)
class Candidate:
    """Bisections ``{[g_i, ξ] : ξ ∈ V}`` sharing the source ``V`` given by ``tails``."""

    elements: Tuple[GroupElement, ...]
    tails: Tuple[FiniteWord, ...] = ((),)

    @property
    def size(self) -> int:
        return len(self.elements)

    def cells(self) -> List[Cell]:
        return [Cell((), g, (), self.tails) for g in self.elements]


@dataclass(frozen=True)
class PatternFamily:
    size: int
    patterns: Tuple[FrozenSet[int], ...]
    samples: Tuple[Optional[EvPeriodicWord], ...] = field(default=(), compare=False)

    def vectors(self) -> List[List[int]]:
        return [[1 if i in pattern else 0 for i in range(self.size)] for pattern in self.patterns]


@dataclass(frozen=True)
class ExclusivePart:
    index: int
    nonempty: bool
    empty_interior: bool
    sample: Optional[EvPeriodicWord] = None

    @property
    def ok(self) -> bool:
        return self.nonempty and self.empty_interior


@dataclass(frozen=True)
class SpanResult:
    full: bool
    kernel: Optional[Tuple[object, ...]]
    ranks: Dict[int, int] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SWitness:
    candidate: Candidate
    family: PatternFamily
    exclusive: Tuple[ExclusivePart, ...]
    t: int
    kernel: Tuple[object, ...]


@dataclass(frozen=True)
class StVerdict:
    holds: bool
    failed_bullet: Optional[int]
    family: Optional[PatternFamily] = None
    exclusive: Tuple[ExclusivePart, ...] = ()
    span: Optional[SpanResult] = None
    witness: Optional[SWitness] = None


@dataclass(frozen=True)
class SearchOutcome:
    """``witness is None`` means nothing was found within the budget, not that none exists."""

    witness: Optional[SWitness]
    candidates_checked: int
    budget: Tuple[int, int, int]

    @property
    def found(self) -> bool:
        return self.witness is not None


# Pattern analysis ----------------------------------------------------------


def _patterns(context: GroupContext, candidate: Candidate) -> GermPatterns:
    frame = Frame((), tuple(FramedCell(i, (), g, candidate.tails) for i, g in enumerate(candidate.elements)))
    return GermPatterns(context, frame)


def realizable_patterns(context: GroupContext, candidate: Candidate, patterns: Optional[GermPatterns] = None) -> PatternFamily:
    patterns = patterns or _patterns(context, candidate)
    found: Dict[FrozenSet[int], Optional[EvPeriodicWord]] = {}
    for accepted in patterns.limit_patterns():
        for members in patterns.classes(accepted):
            if len(members) > 1 and members not in found:
                found[members] = patterns.sample_for(accepted)
    ordered = sorted(found, key=lambda s: (len(s), sorted(s)))
    return PatternFamily(candidate.size, tuple(ordered), tuple(found[p] for p in ordered))


def exclusive_parts(
    context: GroupContext, candidate: Candidate, patterns: Optional[GermPatterns] = None
) -> Tuple[ExclusivePart, ...]:
    patterns = patterns or _patterns(context, candidate)
    limit = patterns.limit_patterns()
    bottom = patterns.bottom_patterns()
    parts: List[ExclusivePart] = []
    for i in range(candidate.size):
        alone = frozenset({i})
        hits = [accepted for accepted in limit if alone in patterns.classes(accepted)]
        parts.append(
            ExclusivePart(
                index=i,
                nonempty=bool(hits),
                empty_interior=not any(alone in patterns.classes(accepted) for accepted in bottom),
                sample=patterns.sample_for(hits[0]) if hits else None,
            )
        )
    return tuple(parts)


# Linear algebra ------------------------------------------------------------


def _primitive(vector: Sequence[Fraction]) -> Tuple[int, ...]:
    denominators = 1
    for value in vector:
        denominators = denominators * value.denominator // gcd(denominators, value.denominator)
    integers = [int(value * denominators) for value in vector]
    divisor = 0
    for value in integers:
        divisor = gcd(divisor, value)
    integers = [value // divisor for value in integers]
    lead = next(value for value in integers if value != 0)
    return tuple(-value if lead < 0 else value for value in integers)


def _rank_and_kernel(rows: List[List[int]], n: int, p: int) -> Tuple[int, Optional[List]]:
    """Rank of ``rows`` and one right kernel vector, over ℚ (``p == 0``) or GF(p)."""
    if not rows:
        return 0, [1] + [0] * (n - 1)
    domain = QQ if p == 0 else GF(p)
    matrix = DomainMatrix([[domain(value) for value in row] for row in rows], (len(rows), n), domain)
    rank = matrix.rank()
    if rank == n:
        return rank, None
    basis = matrix.nullspace().to_list()
    return rank, basis[0]


def span_full(family: PatternFamily, n: int, t: int) -> SpanResult:
    """Whether the vectors ``b_I`` span ``R_t^n``; when not, a functional vanishing on all of them."""
    rows = family.vectors()
    if t == 0:
        rank, kernel = _rank_and_kernel(rows, n, 0)
        if kernel is None:
            return SpanResult(True, None, {0: rank})
        values = [Fraction(int(x.numerator), int(x.denominator)) for x in kernel] if rows else [Fraction(x) for x in kernel]
        return SpanResult(False, _primitive(values), {0: rank})

    ranks: Dict[int, int] = {}
    kernel_mod_t: Optional[Tuple[int, ...]] = None
    for p in primefactors(t):
        rank, kernel = _rank_and_kernel(rows, n, p)
        ranks[p] = rank
        if kernel is None or kernel_mod_t is not None:
            continue
        residues = [int(x) % p for x in kernel]
        lead = next(value for value in residues if value)
        inverse = pow(lead, -1, p)
        lift = t // p
        kernel_mod_t = tuple((value * inverse % p) * lift % t for value in residues)
    return SpanResult(kernel_mod_t is None, kernel_mod_t, ranks)


# Condition check and search -----------------------------------------------------


def check_St(context: GroupContext, candidate: Candidate, t: int) -> StVerdict:
    if candidate.size < 2:
        return StVerdict(False, 1)
    patterns = _patterns(context, candidate)
    exclusive = exclusive_parts(context, candidate, patterns)
    if not all(part.ok for part in exclusive):
        return StVerdict(False, 2, exclusive=exclusive)
    family = realizable_patterns(context, candidate, patterns)
    span = span_full(family, candidate.size, t)
    if span.full:
        return StVerdict(False, 3, family, exclusive, span)
    witness = SWitness(candidate, family, exclusive, t, span.kernel)
    return StVerdict(True, None, family, exclusive, span, witness)


def element_ball(context: GroupContext, radius: int) -> List[Tuple[GroupElement, int]]:
    """Identity, nucleus elements and their pairwise products, each with its radius."""
    ball: List[Tuple[GroupElement, int]] = [(context.nucleus.identity, 0)]
    seen = {context.canonical(context.nucleus.identity)}
    layer = [n for n in context.nucleus.non_identity()]
    if radius >= 1:
        for n in layer:
            key = context.canonical(n)
            if key not in seen:
                seen.add(key)
                ball.append((n, 1))
    if radius >= 2:
        for left, right in itertools.product(layer, repeat=2):
            product = context.canonical(left * right)
            if product not in seen:
                seen.add(product)
                ball.append((product, 2))
    return ball


def search_witness(
    context: GroupContext,
    t: int,
    max_n: Optional[int] = None,
    ball: Optional[int] = None,
    cyl_depth: Optional[int] = None,
) -> SearchOutcome:
    budgets = context.budgets
    max_n = budgets.search_max_n if max_n is None else max_n
    ball = budgets.search_ball if ball is None else ball
    cyl_depth = budgets.search_cyl_depth if cyl_depth is None else cyl_depth

    elements = element_ball(context, ball)
    cylinders = [v for depth in range(cyl_depth + 1) for v in all_words(context.automaton.alphabet_size, depth)]
    checked = 0
    for n in range(2, max_n + 1):
        ordered = sorted(
            ((combo, v) for combo in itertools.combinations(range(len(elements)), n) for v in cylinders),
            key=lambda item: (sum(elements[i][1] for i in item[0]), len(item[1]), item[0], item[1]),
        )
        for combo, v in ordered:
            checked += 1
            candidate = Candidate(tuple(elements[i][0] for i in combo), (v,))
            verdict = check_St(context, candidate, t)
            if verdict.holds:
                logger.info(
                    "Found an S_%d witness with %d elements over cylinder %s after %d candidates",
                    t,
                    n,
                    "".join(map(str, v)) or "X",
                    checked,
                )
                return SearchOutcome(verdict.witness, checked, (max_n, ball, cyl_depth))
    logger.info("No S_%d witness within budget (n<=%d, ball<=%d, depth<=%d)", t, max_n, ball, cyl_depth)
    return SearchOutcome(None, checked, (max_n, ball, cyl_depth))


def build_singular(context: GroupContext, witness: SWitness) -> AlgebraElement:
    ring = RingTag(witness.t)
    terms = tuple(
        (ring.coerce(coefficient), cell) for coefficient, cell in zip(witness.kernel, witness.candidate.cells())
    )
    f = normalize(context, AlgebraElement(ring, terms))
    if not is_singular(context, f):
        raise VerificationFailed(f"{format_algebra(context, f)} is not singular")
    if is_zero(context, f):
        raise VerificationFailed(f"{format_algebra(context, f)} vanishes")
    return f


# Simplicity ----------------------------------------------------------------


class SimplicityVerdict(Enum):
    NOT_SIMPLE = "not_simple"
    CONSISTENT_WITH_SIMPLE = "consistent_with_simple"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EffectivenessViolation:
    element: GroupElement
    cylinder: FiniteWord


@dataclass(frozen=True)
class SimplicityReport:
    characteristic: int
    level_orbits: Tuple[Tuple[int, int], ...]
    level_transitive: bool
    violations: Tuple[EffectivenessViolation, ...]
    search: SearchOutcome
    singular_element: Optional[AlgebraElement]
    verdict: SimplicityVerdict
    complex_singular_nonzero: Optional[bool] = None


def _fixes_levels(context: GroupContext, g: GroupElement, levels: int, memo: Dict[Tuple[GroupElement, int], bool]) -> bool:
    if levels == 0 or g.is_empty:
        return True
    key = (context.canonical(g), levels)
    if key not in memo:
        automaton = context.automaton
        memo[key] = automaton.letter_permutation(g) == tuple(automaton.letters) and all(
            _fixes_levels(context, automaton.section(g, (x,)), levels - 1, memo) for x in automaton.letters
        )
    return memo[key]


def effectiveness_violations(
    context: GroupContext,
    ball: Optional[int] = None,
    depth: Optional[int] = None,
    level_depth: Optional[int] = None,
) -> List[EffectivenessViolation]:
    """Elements fixing every vertex below ``v`` for ``level_depth`` levels whose fixed-point interior misses ``vX``.

    A certificate is bounded evidence: it can disappear at a larger ``level_depth``.
    """
    budgets = context.budgets
    ball = budgets.search_ball if ball is None else ball
    depth = budgets.search_cyl_depth if depth is None else depth
    level_depth = budgets.level_depth if level_depth is None else level_depth
    automaton = context.automaton
    memo: Dict[Tuple[GroupElement, int], bool] = {}
    violations: List[EffectivenessViolation] = []
    for g, radius in element_ball(context, ball):
        if radius == 0:
            continue
        for length in range(depth + 1):
            for v in all_words(automaton.alphabet_size, length):
                if automaton.act_word(g, v) != v:
                    continue
                if not _fixes_levels(context, automaton.section(g, v), level_depth, memo):
                    continue
                region = Intersection((Cylinder(v), TF(g)))
                if context.regions.compile(region).empty_interior():
                    violations.append(EffectivenessViolation(g, v))
    return violations


def simplicity_report(context: GroupContext, p: int, budgets: Optional[Budgets] = None) -> SimplicityReport:
    budgets = budgets or context.budgets
    k = context.automaton.alphabet_size
    orbits = tuple(
        (depth, len(level_orbit(context.automaton, depth))) for depth in range(1, budgets.level_depth + 1)
    )
    transitive = all(size == k**depth for depth, size in orbits)
    violations = tuple(effectiveness_violations(context, budgets.search_ball, budgets.search_cyl_depth, budgets.level_depth))
    search = search_witness(context, p, budgets.search_max_n, budgets.search_ball, budgets.search_cyl_depth)
    singular = build_singular(context, search.witness) if search.witness else None

    if search.found:
        verdict = SimplicityVerdict.NOT_SIMPLE
    elif transitive and not violations:
        verdict = SimplicityVerdict.CONSISTENT_WITH_SIMPLE
    else:
        verdict = SimplicityVerdict.INCONCLUSIVE
    logger.info("Simplicity over characteristic %d: %s", p, verdict.value)
    return SimplicityReport(
        characteristic=p,
        level_orbits=orbits,
        level_transitive=transitive,
        violations=violations,
        search=search,
        singular_element=singular,
        verdict=verdict,
        complex_singular_nonzero=search.found if p == 0 else None,
    )
