from __future__ import annotations

import itertools
import logging
import re
import threading
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

logger = logging.getLogger("germscope_app.automaton")

FiniteWord = Tuple[int, ...]
Letter = Tuple[str, int]

DEFAULT_TRIVIAL_BUDGET = 1_000_000

_NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_STATE_LINE = re.compile(r"^state\s+(?P<name>[^\s:]+)\s*:\s*(?P<body>.*)$")
_TRANSITION = re.compile(r"^(?P<x>\d+)\s*->\s*(?P<y>\d+)\s*/\s*(?P<section>\S+)$")
_POINT_LITERAL = re.compile(r"^(?P<prefix>[0-9]*)\((?P<period>[0-9]+)\)$")


class GermscopeError(Exception):
    """Base class for every error raised by the toolkit."""


class BudgetExceeded(GermscopeError):
    """Raised when a computation outgrows its configured node or state bound."""

    def __init__(self, what: str, limit: int) -> None:
        super().__init__(f"{what} exceeded the budget of {limit}")
        self.what = what
        self.limit = limit


class AutomatonParseError(GermscopeError):
    """Raised when an automaton description cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NonBijectiveOutput(AutomatonParseError):
    """Raised when a state's output map is not a permutation of the alphabet."""


class UnknownState(AutomatonParseError):
    """Raised when a transition targets a state that was never declared."""


class MissingIdentity(AutomatonParseError):
    """Raised when the file does not name its identity state."""


class DuplicateState(AutomatonParseError):
    """Raised when a state name is declared twice."""


class LiteralParseError(GermscopeError):
    """Raised when an element, word or point literal is malformed."""


# Words and points ----------------------------------------------------------


def parse_word(text: str, alphabet_size: Optional[int] = None) -> FiniteWord:
    cleaned = (text or "").strip()
    if cleaned in {"", "ε", "-"}:
        return ()
    if not cleaned.isdigit():
        raise LiteralParseError(f"word '{text}' must be a string of digits")
    word = tuple(int(ch) for ch in cleaned)
    if alphabet_size is not None and any(x >= alphabet_size for x in word):
        raise LiteralParseError(f"word '{text}' uses letters outside 0..{alphabet_size - 1}")
    return word


def format_word(word: Sequence[int]) -> str:
    return "".join(str(x) for x in word)


def all_words(alphabet_size: int, length: int) -> Iterator[FiniteWord]:
    return itertools.product(range(alphabet_size), repeat=length)


def _minimal_period(word: FiniteWord) -> FiniteWord:
    failure = [0] * len(word)
    k = 0
    for i in range(1, len(word)):
        while k and word[i] != word[k]:
            k = failure[k - 1]
        if word[i] == word[k]:
            k += 1
        failure[i] = k
    period = len(word) - failure[-1]
    if len(word) % period == 0:
        return word[:period]
    return word


@dataclass(frozen=True)
class EvPeriodicWord:
    """An eventually periodic boundary point ``prefix · period^∞`` in canonical form."""

    prefix: FiniteWord
    period: FiniteWord

    def __post_init__(self) -> None:
        prefix = tuple(self.prefix)
        period = tuple(self.period)
        if not period:
            raise LiteralParseError("the period of a boundary point must be nonempty")
        period = _minimal_period(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1:] + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def parse(cls, text: str, alphabet_size: Optional[int] = None) -> "EvPeriodicWord":
        match = _POINT_LITERAL.match((text or "").strip())
        if not match:
            raise LiteralParseError(f"point '{text}' must look like u(w), e.g. 0(110) or (1)")
        prefix = parse_word(match.group("prefix"), alphabet_size)
        period = parse_word(match.group("period"), alphabet_size)
        return cls(prefix, period)

    def __str__(self) -> str:
        return f"{format_word(self.prefix)}({format_word(self.period)})"

    def letter(self, index: int) -> int:
        if index < len(self.prefix):
            return self.prefix[index]
        return self.period[(index - len(self.prefix)) % len(self.period)]

    def phase(self, index: int) -> int:
        """Position inside the period for indices past the preperiod."""
        return (index - len(self.prefix)) % len(self.period)

    def take(self, length: int) -> FiniteWord:
        return tuple(self.letter(i) for i in range(length))

    def drop(self, length: int) -> "EvPeriodicWord":
        if length <= len(self.prefix):
            return EvPeriodicWord(self.prefix[length:], self.period)
        shift = (length - len(self.prefix)) % len(self.period)
        return EvPeriodicWord((), self.period[shift:] + self.period[:shift])

    def prepend(self, word: Sequence[int]) -> "EvPeriodicWord":
        return EvPeriodicWord(tuple(word) + self.prefix, self.period)

    def starts_with(self, word: Sequence[int]) -> bool:
        return self.take(len(word)) == tuple(word)


# Group elements ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GroupElement:
    """Freely reduced signed word over automaton states; the rightmost letter acts first."""

    word: Tuple[Letter, ...] = ()

    @classmethod
    def reduced(cls, letters: Iterable[Letter], identity: Optional[str] = None) -> "GroupElement":
        stack: List[Letter] = []
        for name, sign in letters:
            if name == identity:
                continue
            if stack and stack[-1][0] == name and stack[-1][1] == -sign:
                stack.pop()
            else:
                stack.append((name, sign))
        return cls(tuple(stack))

    @classmethod
    def of(cls, *names: str) -> "GroupElement":
        return cls.reduced((name, 1) for name in names)

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def is_empty(self) -> bool:
        return not self.word

    def inverse(self) -> "GroupElement":
        return GroupElement(tuple((name, -sign) for name, sign in reversed(self.word)))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement.reduced(self.word + other.word)

    def __str__(self) -> str:
        if not self.word:
            return "1"
        return ".".join(name + ("'" if sign < 0 else "") for name, sign in self.word)


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return g * h


def invert(g: GroupElement) -> GroupElement:
    return g.inverse()


# Automaton -----------------------------------------------------------------


class Automaton:
    """Moore diagram of an invertible automaton together with the word problem it induces."""

    def __init__(
        self,
        alphabet_size: int,
        states: Sequence[str],
        identity: str,
        transitions: Mapping[str, Sequence[Tuple[int, str]]],
        *,
        trivial_budget: int = DEFAULT_TRIVIAL_BUDGET,
    ) -> None:
        if alphabet_size < 2:
            raise AutomatonParseError(f"alphabet size must be at least 2, got {alphabet_size}")
        self.alphabet_size = alphabet_size
        self.states: Tuple[str, ...] = tuple(states)
        self.identity = identity
        self.trivial_budget = max(int(trivial_budget), 1)

        self._perm: Dict[str, Tuple[int, ...]] = {}
        self._inverse_perm: Dict[str, Tuple[int, ...]] = {}
        self._sections: Dict[str, Tuple[str, ...]] = {}
        for name in self.states:
            rows = transitions[name]
            images = tuple(y for y, _ in rows)
            if sorted(images) != list(range(alphabet_size)):
                raise NonBijectiveOutput(f"state '{name}' does not permute the alphabet: {images}")
            self._perm[name] = images
            inverse = [0] * alphabet_size
            for x, y in enumerate(images):
                inverse[y] = x
            self._inverse_perm[name] = tuple(inverse)
            self._sections[name] = tuple(section for _, section in rows)

        if identity not in self._perm:
            raise MissingIdentity(f"identity state '{identity}' is not declared")
        if self._perm[identity] != tuple(self.letters) or any(s != identity for s in self._sections[identity]):
            raise AutomatonParseError(f"identity state '{identity}' must fix every letter and loop to itself")

        self._lock = threading.Lock()
        self._trivial_memo: Dict[GroupElement, bool] = {}
        self._perm_memo: Dict[GroupElement, Tuple[int, ...]] = {}

    # Structure -------------------------------------------------------

    @property
    def letters(self) -> range:
        return range(self.alphabet_size)

    @property
    def generators(self) -> Tuple[str, ...]:
        return tuple(name for name in self.states if name != self.identity)

    def permutation_of(self, state: str) -> Tuple[int, ...]:
        return self._perm[state]

    def sections_of(self, state: str) -> Tuple[str, ...]:
        return self._sections[state]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automaton):
            return NotImplemented
        return (
            self.alphabet_size == other.alphabet_size
            and self.states == other.states
            and self.identity == other.identity
            and self._perm == other._perm
            and self._sections == other._sections
        )

    def __hash__(self) -> int:
        return hash((self.alphabet_size, self.states, self.identity))

    def __repr__(self) -> str:
        return f"Automaton(k={self.alphabet_size}, states={list(self.states)})"

    # Elements --------------------------------------------------------

    def element(self, letters: Iterable[Letter]) -> GroupElement:
        return GroupElement.reduced(letters, identity=self.identity)

    def state_element(self, name: str) -> GroupElement:
        return self.element([(name, 1)])

    def parse_element(self, text: str) -> GroupElement:
        cleaned = (text or "").strip()
        if cleaned in {"", "1", self.identity}:
            return GroupElement()
        letters: List[Letter] = []
        for token in cleaned.split("."):
            token = token.strip()
            sign = 1
            while token.endswith("'"):
                sign = -sign
                token = token[:-1]
            if token not in self._perm:
                raise LiteralParseError(f"unknown state '{token}' in element '{text}'")
            letters.append((token, sign))
        return self.element(letters)

    def format_element(self, g: GroupElement) -> str:
        return self.identity if g.is_empty else str(g)

    # Tree action -----------------------------------------------------

    def _letter_step(self, name: str, sign: int, x: int) -> Tuple[int, Letter]:
        if sign > 0:
            return self._perm[name][x], (self._sections[name][x], 1)
        y = self._inverse_perm[name][x]
        return y, (self._sections[name][y], -1)

    def step(self, g: GroupElement, x: int) -> Tuple[int, GroupElement]:
        sections: List[Letter] = []
        for name, sign in reversed(g.word):
            x, section = self._letter_step(name, sign, x)
            sections.append(section)
        sections.reverse()
        return x, self.element(sections)

    def act_word(self, g: GroupElement, word: Sequence[int]) -> FiniteWord:
        image: List[int] = []
        for x in word:
            y, g = self.step(g, x)
            image.append(y)
        return tuple(image)

    def section(self, g: GroupElement, word: Sequence[int]) -> GroupElement:
        for x in word:
            _, g = self.step(g, x)
        return g

    def act_point(self, g: GroupElement, point: EvPeriodicWord) -> EvPeriodicWord:
        start_of_cycle = len(point.prefix)
        seen: Dict[Tuple[GroupElement, int], int] = {}
        image: List[int] = []
        index = 0
        while True:
            if index >= start_of_cycle:
                key = (g, point.phase(index))
                if key in seen:
                    first = seen[key]
                    return EvPeriodicWord(tuple(image[:first]), tuple(image[first:]))
                seen[key] = index
            y, g = self.step(g, point.letter(index))
            image.append(y)
            index += 1

    def letter_permutation(self, g: GroupElement) -> Tuple[int, ...]:
        cached = self._perm_memo.get(g)
        if cached is not None:
            return cached
        images = tuple(self.step(g, x)[0] for x in self.letters)
        with self._lock:
            self._perm_memo[g] = images
        return images

    # Word problem ----------------------------------------------------

    def is_trivial(self, g: GroupElement) -> bool:
        if g.is_empty:
            return True
        cached = self._trivial_memo.get(g)
        if cached is not None:
            return cached

        identity_perm = tuple(self.letters)
        seen: Set[GroupElement] = {g}
        queue = deque([g])
        verdict = True
        while queue:
            current = queue.popleft()
            if self.letter_permutation(current) != identity_perm:
                verdict = False
                break
            for x in self.letters:
                _, section = self.step(current, x)
                if section.is_empty or section in seen:
                    continue
                if len(seen) >= self.trivial_budget:
                    raise BudgetExceeded("word-problem section closure", self.trivial_budget)
                seen.add(section)
                queue.append(section)

        with self._lock:
            if verdict:
                for element in seen:
                    self._trivial_memo[element] = True
            else:
                self._trivial_memo[g] = False
        return verdict

    def elements_equal(self, g: GroupElement, h: GroupElement) -> bool:
        if g == h:
            return True
        return self.is_trivial(g * h.inverse())


# File format ---------------------------------------------------------------


def parse_automaton(text: str, *, trivial_budget: int = DEFAULT_TRIVIAL_BUDGET) -> Automaton:
    alphabet_size: Optional[int] = None
    identity: Optional[str] = None
    order: List[str] = []
    raw_rows: Dict[str, List[Tuple[int, int, str]]] = {}
    row_lines: Dict[str, int] = {}

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        if alphabet_size is None:
            key, _, value = line.partition(":")
            if key.strip() != "alphabet":
                raise AutomatonParseError("the first directive must be 'alphabet: k'", line_number)
            try:
                alphabet_size = int(value.strip())
            except ValueError:
                raise AutomatonParseError(f"invalid alphabet size '{value.strip()}'", line_number) from None
            if alphabet_size < 2:
                raise AutomatonParseError("alphabet size must be at least 2", line_number)
            continue

        if line.startswith("identity"):
            key, _, value = line.partition(":")
            if key.strip() != "identity" or not value.strip():
                raise AutomatonParseError("expected 'identity: NAME'", line_number)
            identity = value.strip()
            continue

        match = _STATE_LINE.match(line)
        if not match:
            raise AutomatonParseError(f"unrecognised line '{line}'", line_number)
        name = match.group("name")
        if not _NAME_PATTERN.match(name):
            raise AutomatonParseError(f"invalid state name '{name}'", line_number)
        if name in raw_rows:
            raise DuplicateState(f"state '{name}' declared twice", line_number)

        rows: List[Tuple[int, int, str]] = []
        for chunk in match.group("body").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            transition = _TRANSITION.match(chunk)
            if not transition:
                raise AutomatonParseError(f"malformed transition '{chunk}' for state '{name}'", line_number)
            rows.append((int(transition.group("x")), int(transition.group("y")), transition.group("section")))
        order.append(name)
        raw_rows[name] = rows
        row_lines[name] = line_number

    if alphabet_size is None:
        raise AutomatonParseError("missing 'alphabet: k' directive")
    if identity is None:
        raise MissingIdentity("missing 'identity: NAME' directive")
    if identity not in raw_rows:
        order.insert(0, identity)
        raw_rows[identity] = [(x, x, identity) for x in range(alphabet_size)]
        row_lines[identity] = 0

    transitions: Dict[str, List[Tuple[int, str]]] = {}
    for name in order:
        line_number = row_lines[name] or None
        by_letter: Dict[int, Tuple[int, str]] = {}
        for x, y, section in raw_rows[name]:
            if x >= alphabet_size or y >= alphabet_size:
                raise AutomatonParseError(f"letter out of range in state '{name}'", line_number)
            if x in by_letter:
                raise AutomatonParseError(f"letter {x} listed twice for state '{name}'", line_number)
            if section not in raw_rows:
                raise UnknownState(f"state '{name}' refers to undeclared state '{section}'", line_number)
            by_letter[x] = (y, section)
        missing = [x for x in range(alphabet_size) if x not in by_letter]
        if missing:
            raise AutomatonParseError(f"state '{name}' does not list letters {missing}", line_number)
        images = [by_letter[x][0] for x in range(alphabet_size)]
        if len(set(images)) != alphabet_size:
            raise NonBijectiveOutput(f"state '{name}' does not permute the alphabet: {images}", line_number)
        transitions[name] = [by_letter[x] for x in range(alphabet_size)]

    automaton = Automaton(alphabet_size, order, identity, transitions, trivial_budget=trivial_budget)
    logger.debug("Parsed automaton with %d states over %d letters", len(order), alphabet_size)
    return automaton


def format_automaton(automaton: Automaton) -> str:
    lines = [f"alphabet: {automaton.alphabet_size}", f"identity: {automaton.identity}"]
    for name in automaton.states:
        perm = automaton.permutation_of(name)
        sections = automaton.sections_of(name)
        body = ", ".join(f"{x} -> {perm[x]} / {sections[x]}" for x in automaton.letters)
        lines.append(f"state {name}: {body}")
    return "\n".join(lines) + "\n"


def ggs_automaton(prime: int, defining_vector: Sequence[int], *, trivial_budget: int = DEFAULT_TRIVIAL_BUDGET) -> Automaton:
    """Automaton of the GGS group over ``prime`` letters with the given defining vector.

    States are ``e``, the rotations ``a, a2, ..., a{p-1}`` and ``t``, which fixes
    every letter with sections ``a^{e_0}, ..., a^{e_{p-2}}, t``.
    """
    if prime < 2 or any(prime % d == 0 for d in range(2, prime)):
        raise AutomatonParseError(f"GGS automata need a prime alphabet, got {prime}")
    if len(defining_vector) != prime - 1:
        raise AutomatonParseError(f"defining vector must have {prime - 1} entries")

    def rotation(power: int) -> str:
        power %= prime
        if power == 0:
            return "e"
        return "a" if power == 1 else f"a{power}"

    states = ["e"] + [rotation(i) for i in range(1, prime)] + ["t"]
    transitions: Dict[str, List[Tuple[int, str]]] = {"e": [(x, "e") for x in range(prime)]}
    for power in range(1, prime):
        transitions[rotation(power)] = [((x + power) % prime, "e") for x in range(prime)]
    transitions["t"] = [(x, rotation(defining_vector[x])) for x in range(prime - 1)] + [(prime - 1, "t")]
    return Automaton(prime, states, "e", transitions, trivial_budget=trivial_budget)


def level_orbit(automaton: Automaton, depth: int) -> Set[FiniteWord]:
    """Orbit of ``0^depth`` under the group generated by the automaton states."""
    start: FiniteWord = (0,) * depth
    generators = [automaton.state_element(name) for name in automaton.generators]
    generators += [g.inverse() for g in generators]
    orbit: Set[FiniteWord] = {start}
    queue = deque([start])
    while queue:
        word = queue.popleft()
        for g in generators:
            image = automaton.act_word(g, word)
            if image not in orbit:
                orbit.add(image)
                queue.append(image)
    return orbit


# Interning -----------------------------------------------------------------


class ElementTable:
    """Interning table assigning canonical representatives to group elements.

    New elements are compared only against known elements sharing their action
    on words of length ``signature_depth``.
    """

    def __init__(self, automaton: Automaton, signature_depth: int = 2) -> None:
        self.automaton = automaton
        self.signature_depth = signature_depth
        self._lock = threading.RLock()
        self._representatives: List[GroupElement] = []
        self._by_word: Dict[GroupElement, int] = {}
        self._by_signature: Dict[Tuple[FiniteWord, ...], List[int]] = {}
        self._probe_words = list(all_words(automaton.alphabet_size, signature_depth))

        self.intern(GroupElement())
        for name in automaton.generators:
            self.intern(automaton.state_element(name))
        for name in automaton.generators:
            self.intern(automaton.state_element(name).inverse())

    def __len__(self) -> int:
        return len(self._representatives)

    def _signature(self, g: GroupElement) -> Tuple[FiniteWord, ...]:
        return tuple(self.automaton.act_word(g, word) for word in self._probe_words)

    def intern(self, g: GroupElement) -> int:
        known = self._by_word.get(g)
        if known is not None:
            return known
        signature = self._signature(g)
        with self._lock:
            known = self._by_word.get(g)
            if known is not None:
                return known
            bucket = self._by_signature.setdefault(signature, [])
            for candidate in bucket:
                if self.automaton.elements_equal(g, self._representatives[candidate]):
                    self._by_word[g] = candidate
                    return candidate
            index = len(self._representatives)
            self._representatives.append(g)
            self._by_word[g] = index
            bucket.append(index)
            return index

    def representative(self, index: int) -> GroupElement:
        return self._representatives[index]

    def canonical(self, g: GroupElement) -> GroupElement:
        return self._representatives[self.intern(g)]
