"""Steinberg algebra elements over ℚ and ℤ/tℤ.

Elements are finite sums of coefficients times compact open bisections. There
is no global normal form: equality, singularity and support are all decided by
the germ-coincidence patterns of the element's cells.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union as TypingUnion

from .automaton import EvPeriodicWord, FiniteWord, GermscopeError, LiteralParseError, format_word, parse_word
from .context import GroupContext
from .groupoid import (
    Cell,
    CoverPoint,
    Frame,
    Germ,
    GermPatterns,
    cell_contains,
    cell_germ,
    compose_cells,
    compose_germs,
    germ_equal,
    intersect_tails,
    invert_cell,
    invert_germ,
    localize,
)
from .regsets import Region, Union

logger = logging.getLogger("germscope_app.steinberg")

Scalar = TypingUnion[Fraction, int]


class RingMismatch(GermscopeError):
    """Raised when elements over different coefficient rings are combined."""


class CoverInsufficient(GermscopeError):
    """Raised when an element's support is not covered by the given bisections."""


class VerificationFailed(GermscopeError):
    """Raised when a constructed element fails its own postcondition."""


# Coefficient rings ---------------------------------------------------------


@dataclass(frozen=True)
class RingTag:
    """``modulus == 0`` is ℚ; otherwise ℤ/modulus."""

    modulus: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 0 or self.modulus == 1:
            raise ValueError(f"unsupported ring parameter t={self.modulus}; use 0 for Q or t >= 2")

    @property
    def is_rational(self) -> bool:
        return self.modulus == 0

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.is_rational else 0

    @property
    def one(self) -> Scalar:
        return self.coerce(1)

    def coerce(self, value: TypingUnion[int, Fraction, str]) -> Scalar:
        value = Fraction(value)
        if self.is_rational:
            return value
        denominator = value.denominator % self.modulus
        try:
            inverse = pow(denominator, -1, self.modulus)
        except ValueError as exc:
            raise LiteralParseError(f"{value} has no image in Z/{self.modulus}") from exc
        return (value.numerator * inverse) % self.modulus

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        return a + b if self.is_rational else (a + b) % self.modulus

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        return a * b if self.is_rational else (a * b) % self.modulus

    def neg(self, a: Scalar) -> Scalar:
        return -a if self.is_rational else (-a) % self.modulus

    def is_zero(self, a: Scalar) -> bool:
        return a == 0

    def total(self, values: Sequence[Scalar]) -> Scalar:
        result = self.zero
        for value in values:
            result = self.add(result, value)
        return result

    def format(self, a: Scalar) -> str:
        return str(a)

    def __str__(self) -> str:
        return "Q" if self.is_rational else f"Z/{self.modulus}"


# Elements ------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraElement:
    ring: RingTag
    terms: Tuple[Tuple[Scalar, Cell], ...] = ()

    @classmethod
    def indicator(cls, ring: RingTag, *cells: Cell) -> "AlgebraElement":
        return cls(ring, tuple((ring.one, cell) for cell in cells))

    @property
    def cells(self) -> List[Cell]:
        return [cell for _, cell in self.terms]

    @property
    def coefficients(self) -> List[Scalar]:
        return [value for value, _ in self.terms]

    def __len__(self) -> int:
        return len(self.terms)


def _same_ring(f: AlgebraElement, g: AlgebraElement) -> RingTag:
    if f.ring != g.ring:
        raise RingMismatch(f"cannot combine elements over {f.ring} and {g.ring}")
    return f.ring


def normalize(context: GroupContext, f: AlgebraElement) -> AlgebraElement:
    ring = f.ring
    merged: Dict[Cell, Scalar] = {}
    for value, cell in f.terms:
        cell = Cell(cell.u, context.canonical(cell.g), cell.v, cell.tails).normalized(context.automaton.alphabet_size)
        merged[cell] = ring.add(merged.get(cell, ring.zero), ring.coerce(value))
    terms = tuple((value, cell) for cell, value in merged.items() if not ring.is_zero(value))
    return AlgebraElement(ring, terms)


def add(context: GroupContext, f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    ring = _same_ring(f, g)
    return normalize(context, AlgebraElement(ring, f.terms + g.terms))


def scale(context: GroupContext, c: TypingUnion[int, Fraction], f: AlgebraElement) -> AlgebraElement:
    factor = f.ring.coerce(c)
    return normalize(context, AlgebraElement(f.ring, tuple((f.ring.mul(factor, value), cell) for value, cell in f.terms)))


def subtract(context: GroupContext, f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    return add(context, f, scale(context, -1, g))


def convolve(context: GroupContext, f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    ring = _same_ring(f, g)
    terms: List[Tuple[Scalar, Cell]] = []
    for a, left in f.terms:
        for b, right in g.terms:
            product = ring.mul(a, b)
            if ring.is_zero(product):
                continue
            terms.extend((product, cell) for cell in compose_cells(context, left, right))
    return normalize(context, AlgebraElement(ring, tuple(terms)))


def involute(context: GroupContext, f: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(f.ring, tuple((value, invert_cell(context, cell)) for value, cell in f.terms))


def evaluate(context: GroupContext, f: AlgebraElement, germ: Germ) -> Scalar:
    ring = f.ring
    return ring.total([value for value, cell in f.terms if cell_contains(context, cell, germ)])


# Support -------------------------------------------------------------------


@dataclass(frozen=True)
class SupportClass:
    """One germ class of a frame: the pieces in ``members`` share a germ on ``region``."""

    v: FiniteWord
    ambient: FiniteWord
    u: FiniteWord
    members: Tuple[int, ...]
    pattern: FrozenSet[int]
    region: Region
    value: Scalar
    sample: Optional[EvPeriodicWord]


@dataclass(frozen=True)
class FrameRegion:
    ambient: FiniteWord
    region: Region


def _frame_analysis(context: GroupContext, f: AlgebraElement) -> List[Tuple[Frame, GermPatterns]]:
    return [(frame, GermPatterns(context, frame)) for frame in localize(context, f.cells)]


def _class_values(f: AlgebraElement, frame: Frame, patterns: GermPatterns, pattern: FrozenSet[int]):
    for members in patterns.classes(pattern):
        pieces = [frame.cells[i] for i in sorted(members)]
        value = f.ring.total([f.terms[piece.index][0] for piece in pieces])
        yield pieces, value


def support_partition(context: GroupContext, f: AlgebraElement) -> List[SupportClass]:
    classes: List[SupportClass] = []
    for frame, patterns in _frame_analysis(context, f):
        for pattern in patterns.limit_patterns():
            for pieces, value in _class_values(f, frame, patterns, pattern):
                classes.append(
                    SupportClass(
                        v=frame.v,
                        ambient=patterns.ambient,
                        u=pieces[0].u,
                        members=tuple(piece.index for piece in pieces),
                        pattern=pattern,
                        region=patterns.region_for(pattern),
                        value=value,
                        sample=patterns.sample_for(pattern),
                    )
                )
    return classes


def _nonzero_somewhere(f: AlgebraElement, frame: Frame, patterns: GermPatterns, pattern: FrozenSet[int]) -> bool:
    return any(not f.ring.is_zero(value) for _, value in _class_values(f, frame, patterns, pattern))


def support_region(context: GroupContext, f: AlgebraElement) -> List[FrameRegion]:
    """Source projection of the strict support, one region per frame."""
    regions: List[FrameRegion] = []
    for frame, patterns in _frame_analysis(context, f):
        parts = tuple(
            patterns.region_for(pattern)
            for pattern in patterns.limit_patterns()
            if _nonzero_somewhere(f, frame, patterns, pattern)
        )
        if parts:
            regions.append(FrameRegion(patterns.ambient, Union(parts) if len(parts) > 1 else parts[0]))
    return regions


def is_singular(context: GroupContext, f: AlgebraElement) -> bool:
    for frame, patterns in _frame_analysis(context, f):
        if any(_nonzero_somewhere(f, frame, patterns, pattern) for pattern in patterns.bottom_patterns()):
            return False
    return True


def is_zero(context: GroupContext, f: AlgebraElement) -> bool:
    for frame, patterns in _frame_analysis(context, f):
        if any(_nonzero_somewhere(f, frame, patterns, pattern) for pattern in patterns.limit_patterns()):
            return False
    return True


def semantically_equal(context: GroupContext, f: AlgebraElement, g: AlgebraElement) -> bool:
    return is_zero(context, subtract(context, f, g))


# Decomposition -------------------------------------------------------------


def _peel(
    context: GroupContext,
    remainder: AlgebraElement,
    covers: Sequence[Cell],
    position: int,
) -> List[Tuple[Scalar, Cell]]:
    """Subcells of ``covers[position]`` carrying the remainder's value where that cover is the last one left."""
    ring = remainder.ring
    cells = remainder.cells + list(covers[position:])
    cover_index = len(remainder.terms)
    later = set(range(cover_index + 1, len(cells)))
    coefficients = remainder.coefficients + [ring.zero] * (len(cells) - cover_index)
    emitted: List[Tuple[Scalar, Cell]] = []

    for frame in localize(context, cells):
        piece_at = {piece.index: position_in_frame for position_in_frame, piece in enumerate(frame.cells)}
        if cover_index not in piece_at:
            continue
        local = piece_at[cover_index]
        piece = frame.cells[local]
        patterns = GermPatterns(context, frame)
        product = patterns.product

        def values_at(node) -> set:
            values = set()
            for pattern in product.limit_patterns(node):
                for members in patterns.classes(pattern):
                    if local not in members:
                        continue
                    if any(frame.cells[i].index in later for i in members):
                        continue
                    values.add(ring.total([coefficients[frame.cells[i].index] for i in members]))
            return values

        def descend(node, word: FiniteWord, path: FrozenSet) -> None:
            values = values_at(node)
            if len(values) <= 1:
                value = next(iter(values), ring.zero)
                tails = intersect_tails(piece.tails, patterns.start + word)
                if not ring.is_zero(value) and tails:
                    emitted.append((value, Cell(piece.u, piece.g, frame.v, tails)))
                return
            if node in path:
                raise CoverInsufficient(
                    f"values inside cover cell {position} never settle below {format_word(frame.v + patterns.start + word)}"
                )
            for x in context.letters:
                descend(product.step(node, x), word + (x,), path | {node})

        descend(product.root, (), frozenset())
    return emitted


def decompose(context: GroupContext, f: AlgebraElement, covers: Sequence[Cell]) -> List[AlgebraElement]:
    """Split ``f`` into parts supported in the given bisections, in cover order."""
    ring = f.ring
    remainder = normalize(context, f)
    parts: List[AlgebraElement] = []
    for position in range(len(covers)):
        part = normalize(context, AlgebraElement(ring, tuple(_peel(context, remainder, covers, position))))
        parts.append(part)
        remainder = subtract(context, remainder, part)
    if not is_zero(context, remainder):
        raise CoverInsufficient("the support is not contained in the union of the cover cells")
    logger.debug("Decomposed element with %d terms into %d parts", len(f), len(parts))
    return parts


# Cover evaluation and oracles ---------------------------------------------------


def evaluate_cover(context: GroupContext, f: AlgebraElement, cover_point: CoverPoint) -> Scalar:
    prefix = cover_point.base.take(cover_point.depth)
    return f.ring.total(
        [evaluate(context, f, Germ(cover_point.base, prefix, m, prefix)) for m in cover_point.members]
    )


def brute_force_convolution(context: GroupContext, f: AlgebraElement, g: AlgebraElement, germ: Germ) -> Scalar:
    """``(f * g)(γ)`` as a sum over factorizations ``γ = γ1 γ2`` with ``γ2`` a germ of ``g``."""
    ring = _same_ring(f, g)
    seen: List[Germ] = []
    for cell in g.cells:
        if not cell.source_contains(germ.base):
            continue
        candidate = cell_germ(cell, germ.base)
        if not any(germ_equal(context, candidate, known) for known in seen):
            seen.append(candidate)
    total = ring.zero
    for right in seen:
        left = compose_germs(context, germ, invert_germ(context, right))
        total = ring.add(total, ring.mul(evaluate(context, f, left), evaluate(context, g, right)))
    return total


# Literals ------------------------------------------------------------------

_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coefficient>\d+(?:/\d+)?)\s*\*?\s*)?"
    r"\[(?P<u>[^|\]]*)\|(?P<g>[^|\]]*)\|(?P<v>[^|\]]*)(?:\|(?P<tails>[^\]]*))?\]\s*"
)


def parse_cell(context: GroupContext, u: str, g: str, v: str, tails: Optional[str] = None) -> Cell:
    k = context.automaton.alphabet_size
    tail_words: Tuple[FiniteWord, ...] = ((),)
    if tails is not None and tails.strip():
        tail_words = tuple(parse_word(part, k) for part in tails.split(","))
    return Cell(parse_word(u, k), context.element(g.strip()), parse_word(v, k), tail_words)


def parse_algebra(context: GroupContext, text: str, ring: RingTag) -> AlgebraElement:
    """Parse ``c*[u|g|v|W] + ...``; ``*`` and the coefficient may be omitted."""
    text = (text or "").strip()
    terms: List[Tuple[Scalar, Cell]] = []
    position = 0
    if text in ("", "0"):
        return AlgebraElement(ring)
    while position < len(text):
        match = _TERM.match(text, position)
        if not match or match.end() == position:
            raise LiteralParseError(f"cannot parse algebra element near '{text[position:]}'")
        if terms and not match.group("sign"):
            raise LiteralParseError(f"missing '+' or '-' before '{match.group(0).strip()}'")
        coefficient = ring.coerce(match.group("coefficient") or 1)
        if match.group("sign") == "-":
            coefficient = ring.neg(coefficient)
        cell = parse_cell(context, match.group("u"), match.group("g"), match.group("v"), match.group("tails"))
        terms.append((coefficient, cell))
        position = match.end()
    return AlgebraElement(ring, tuple(terms))


def format_algebra(context: GroupContext, f: AlgebraElement) -> str:
    if not f.terms:
        return "0"
    pieces: List[str] = []
    for value, cell in f.terms:
        negative = f.ring.is_rational and value < 0
        magnitude = -value if negative else value
        body = cell.describe(context)
        text = body if magnitude == 1 else f"{magnitude}*{body}"
        if not pieces:
            pieces.append(f"-{text}" if negative else text)
        else:
            pieces.append(f"{'-' if negative else '+'} {text}")
    return " ".join(pieces)


_GERM = re.compile(
    r"^\s*(?:\[(?P<u>[^|\]]*)\|(?P<g>[^|\]]*)\|(?P<v>[^|\]]*)\]|(?P<element>[^@\[]*?))\s*@\s*(?P<point>\S.*?)\s*$"
)


def parse_germ(context: GroupContext, text: str) -> Germ:
    """Parse ``g@point`` or ``[u|g|v]@point``."""
    match = _GERM.match(text or "")
    if not match:
        raise LiteralParseError(f"germ '{text}' must look like g@point or [u|g|v]@point")
    k = context.automaton.alphabet_size
    point = EvPeriodicWord.parse(match.group("point"), k)
    if match.group("element") is not None:
        return Germ(point, (), context.element(match.group("element").strip()), ())
    return Germ(point, parse_word(match.group("u"), k), context.element(match.group("g").strip()), parse_word(match.group("v"), k))
