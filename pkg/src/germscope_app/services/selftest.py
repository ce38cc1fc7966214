"""Acceptance checks over the bundled corpus."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List, Tuple

from .automaton import EvPeriodicWord, format_automaton, parse_automaton
from .groupoid import D0Verdict, d0_status, fiber, find_nonregular_witness, is_dangerous
from .reports import Report
from .scondition import PatternFamily, build_singular, search_witness, span_full
from .steinberg import is_singular, is_zero
from .toolkit import ToolkitHandler

CORPUS = ("grigorchuk", "grigorchuk_erschler", "gupta_sidki3", "odometer", "multispinal4")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _names(toolkit: ToolkitHandler, name: str) -> List[str]:
    return list(toolkit.context(name).nucleus.names)


def check_corpus_round_trip(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    for name in CORPUS:
        automaton = toolkit.context(name).automaton
        if parse_automaton(format_automaton(automaton)) != automaton:
            return False, f"{name} does not survive re-serialization"
    return True, f"{len(CORPUS)} files"


def check_nuclei(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    expected = {
        "grigorchuk": {"e", "a", "b", "c", "d"},
        "grigorchuk_erschler": {"e", "h", "alpha", "beta", "gamma"},
        "odometer": {"e", "a", "a'"},
    }
    for name, names in expected.items():
        found = set(_names(toolkit, name))
        if found != names:
            return False, f"{name}: {sorted(found)}"
    return True, "grigorchuk 5, grigorchuk_erschler 5, odometer 3"


def check_word_problem(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    automaton = toolkit.context("grigorchuk").automaton
    relations = ["b.c.d", "b.b", "c.c", "d.d", "a.a"]
    bad = [word for word in relations if not automaton.is_trivial(automaton.parse_element(word))]
    if automaton.is_trivial(automaton.parse_element("a.b")):
        bad.append("a.b (nontrivial)")
    return not bad, ", ".join(bad) or "bc = d and the involutions hold"


def check_dangerous(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    context = toolkit.context("grigorchuk")
    dangerous, witnesses = is_dangerous(context, EvPeriodicWord.parse("(1)"))
    names = {context.name(n) for _, n in witnesses}
    safe, _ = is_dangerous(context, EvPeriodicWord.parse("0(01)"))
    return dangerous and names == {"b", "c", "d"} and not safe, f"(1) witnesses {sorted(names)}"


def check_fibers(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    grigorchuk = toolkit.context("grigorchuk")
    erschler = toolkit.context("grigorchuk_erschler")
    point = EvPeriodicWord.parse("(1)")
    sizes = (len(fiber(grigorchuk, point)), len(fiber(erschler, point)), len(fiber(grigorchuk, EvPeriodicWord.parse("0(01)"))))
    return sizes == (4, 3, 1), f"fiber sizes {sizes}"


def check_erschler_witnesses(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    context = toolkit.context("grigorchuk_erschler")
    for t in (0, 2, 3, 6):
        outcome = search_witness(context, t, max_n=4, ball=1, cyl_depth=0)
        if outcome.witness is None or outcome.witness.candidate.size != 4:
            return False, f"no four-element witness for t={t}"
        f = build_singular(context, outcome.witness)
        if is_zero(context, f) or not is_singular(context, f):
            return False, f"t={t} element failed verification"
    return True, "t in 0, 2, 3, 6"


def check_grigorchuk_characteristic_two(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    context = toolkit.context("grigorchuk")
    outcome = search_witness(context, 2, max_n=4, ball=1, cyl_depth=0)
    if outcome.witness is None:
        return False, "no S_2 witness"
    names = [context.name(g) for g in outcome.witness.candidate.elements]
    ok = names == ["e", "b", "c", "d"] and len(outcome.witness.family.patterns) == 6 and tuple(outcome.witness.kernel) == (1, 1, 1, 1)
    return ok, f"witness {names} kernel {outcome.witness.kernel}"


def check_grigorchuk_rational_none(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    outcome = search_witness(toolkit.context("grigorchuk"), 0, max_n=4, ball=2, cyl_depth=2)
    return outcome.witness is None, f"{outcome.candidates_checked} candidates checked"


def check_d0(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    grigorchuk = toolkit.context("grigorchuk")
    verdicts = {name: d0_status(toolkit.context(name)).verdict for name in ("grigorchuk", "gupta_sidki3", "odometer")}
    ok = (
        verdicts["grigorchuk"] is D0Verdict.NONEMPTY
        and verdicts["gupta_sidki3"] is D0Verdict.EMPTY
        and verdicts["odometer"] is D0Verdict.EMPTY
        and find_nonregular_witness(grigorchuk) is not None
    )
    return ok, ", ".join(f"{name} {verdict.value}" for name, verdict in verdicts.items())


def check_span(toolkit: ToolkitHandler) -> Tuple[bool, str]:
    triangle = PatternFamily(3, (frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 2})))
    rational = span_full(triangle, 3, 0)
    binary = span_full(triangle, 3, 2)
    ok = rational.full and not binary.full and binary.kernel == (1, 1, 1)
    return ok, f"Q full={rational.full}, F2 kernel={binary.kernel}"


CHECKS: List[Tuple[str, Callable[[ToolkitHandler], Tuple[bool, str]]]] = [
    ("corpus round trip", check_corpus_round_trip),
    ("nucleus reproduction", check_nuclei),
    ("word problem", check_word_problem),
    ("dangerous points", check_dangerous),
    ("fibers", check_fibers),
    ("singular ideal over every ring", check_erschler_witnesses),
    ("characteristic two witness", check_grigorchuk_characteristic_two),
    ("no rational witness at budget", check_grigorchuk_rational_none),
    ("regular open and D0", check_d0),
    ("span over Q and F2", check_span),
]


def run_selftest(toolkit: ToolkitHandler) -> List[CheckResult]:
    results: List[CheckResult] = []
    for name, check in CHECKS:
        started = time.perf_counter()
        try:
            passed, detail = check(toolkit)
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
            toolkit.logger.exception("Self-test check '%s' raised", name)
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, passed, detail, round(time.perf_counter() - started, 3)))
        toolkit.logger.info("Self-test %s: %s", name, "ok" if passed else "FAILED")
    return results


def selftest_report(toolkit: ToolkitHandler) -> Tuple[Report, int]:
    report = Report(command="selftest", schema_version=toolkit.schema_version)
    results = run_selftest(toolkit)
    failed = [result for result in results if not result.passed]
    report.verdicts["passed"] = len(results) - len(failed)
    report.verdicts["failed"] = len(failed)
    report.certificates["checks"] = [
        {"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds} for r in results
    ]
    if toolkit.record_timings:
        report.timings["selftest"] = round(sum(r.seconds for r in results), 3)
    return report, 1 if failed else 0
