from __future__ import annotations

import logging
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Mapping, Optional, Tuple

from .automaton import AutomatonParseError, EvPeriodicWord, LiteralParseError, parse_automaton
from .context import Budgets, GroupContext
from .groupoid import (
    CompactOpenSet,
    D0Verdict,
    d0_status,
    fiber,
    find_nonregular_witness,
    is_dangerous,
    realizing_pattern,
    regular_open,
)
from .regsets import tf_classify
from .reports import (
    Report,
    cell_dict,
    cover_point_dict,
    element_text,
    point_text,
    scalar_value,
    word_text,
)
from .scondition import SimplicityVerdict, build_singular, search_witness, simplicity_report
from .steinberg import (
    RingTag,
    evaluate,
    format_algebra,
    is_singular,
    is_zero,
    parse_algebra,
    parse_germ,
    support_partition,
)


class ToolkitHandler:
    """Loads automata, keeps one cached context per file and budget set, and builds command reports."""

    def __init__(self, logger: Optional[logging.Logger] = None, app_config: Optional[Mapping[str, Any]] = None) -> None:
        self.logger = logger or logging.getLogger("germscope_app.toolkit")
        self.app_config: Mapping[str, Any] = app_config or {}
        self.corpus_dir = Path(self.app_config.get("CORPUS_DIR") or Path(__file__).resolve().parent.parent / "corpus")
        self.budgets = Budgets.from_config(self.app_config)
        self.schema_version = str(self.app_config.get("REPORT_SCHEMA_VERSION") or "1.0")
        self.record_timings = bool(self.app_config.get("REPORT_TIMINGS", True))
        self._lock = threading.Lock()
        self._contexts: Dict[Tuple[Path, Budgets], GroupContext] = {}

    # Loading -------------------------------------------------------------

    def resolve_path(self, name: str) -> Path:
        raw = Path(name)
        candidates = [raw, self.corpus_dir / raw, self.corpus_dir / f"{raw}.ssg", self.corpus_dir / raw.name]
        for candidate in candidates:
            if candidate.is_file():
                return candidate.resolve()
        raise AutomatonParseError(f"automaton file '{name}' not found (also looked in {self.corpus_dir})")

    def context(self, name: str, **overrides: Optional[int]) -> GroupContext:
        path = self.resolve_path(name)
        budgets = self.budgets.replace(**overrides)
        key = (path, budgets)
        with self._lock:
            cached = self._contexts.get(key)
        if cached is not None:
            return cached

        automaton = parse_automaton(path.read_text(encoding="utf-8"), trivial_budget=budgets.trivial_nodes)
        created = GroupContext(automaton, budgets, logger=self.logger)
        self.logger.debug("Loaded %s: %d states over %d letters", path.name, len(automaton.states), automaton.alphabet_size)
        with self._lock:
            return self._contexts.setdefault(key, created)

    def _report(self, command: str, **inputs: Any) -> Report:
        return Report(command=command, inputs=inputs, schema_version=self.schema_version)

    @contextmanager
    def _timed(self, report: Report, label: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            if self.record_timings:
                report.timings[label] = round(time.perf_counter() - started, 6)

    # Automata ------------------------------------------------------------

    def nucleus_report(self, name: str, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("nucleus", file=name)
        context = self.context(name, **overrides)
        with self._timed(report, "nucleus"):
            certificate = context.certificate
        nucleus = certificate.nucleus
        report.verdicts["size"] = len(nucleus)
        report.certificates["elements"] = [
            {
                "name": nucleus.names[index],
                "word": context.automaton.format_element(element),
                "permutation": list(nucleus.permutations[index]),
                "sections": [nucleus.names[target] for target in nucleus.transitions[index]],
            }
            for index, element in enumerate(nucleus.elements)
        ]
        report.certificates["contraction_depth"] = certificate.contraction_depth
        return report, 0

    def tf_report(self, name: str, element: str, point: str, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("tf", file=name, element=element, point=point)
        context = self.context(name, **overrides)
        g = context.element(element)
        omega = EvPeriodicWord.parse(point, context.automaton.alphabet_size)
        with self._timed(report, "tf"):
            classification = tf_classify(context.regions, g, omega)
            sf = context.regions.sf_automaton(g)
        report.verdicts["class"] = classification.value
        report.certificates["sf_states"] = len(sf.states)
        report.certificates["has_boundary"] = sf.has_boundary()
        report.certificates["minimal_words"] = [word_text(w) for w in sf.accepted_words(4)]
        return report, 0

    # Groupoid ------------------------------------------------------------

    def dangerous_report(self, name: str, point: str, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("dangerous", file=name, point=point)
        context = self.context(name, **overrides)
        omega = EvPeriodicWord.parse(point, context.automaton.alphabet_size)
        with self._timed(report, "dangerous"):
            dangerous, witnesses = is_dangerous(context, omega)
        report.verdicts["dangerous"] = dangerous
        report.certificates["witnesses"] = [
            {"depth": depth, "element": element_text(context, n)} for depth, n in witnesses
        ]
        return report, 0 if dangerous else 1

    def fiber_report(self, name: str, point: str, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("fiber", file=name, point=point)
        context = self.context(name, **overrides)
        omega = EvPeriodicWord.parse(point, context.automaton.alphabet_size)
        with self._timed(report, "fiber"):
            points = fiber(context, omega)
            patterns = [realizing_pattern(context, cover_point) for cover_point in points]
        report.verdicts["cover_points"] = len(points)
        report.certificates["fiber"] = [
            cover_point_dict(context, cover_point, phases) for cover_point, phases in zip(points, patterns)
        ]
        return report, 0

    def d0_report(self, name: str, depth: Optional[int] = None, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("d0", file=name, depth=depth)
        context = self.context(name, **overrides)
        with self._timed(report, "d0"):
            status = d0_status(context, depth)
        report.verdicts["d0"] = status.verdict.value
        report.verdicts["hausdorff"] = status.hausdorff
        report.verdicts["all_compact_open_regular_open"] = (
            None if status.verdict is D0Verdict.INCONCLUSIVE else status.verdict is D0Verdict.EMPTY
        )
        report.certificates["subsets_checked"] = status.subsets_checked
        if status.witness is not None:
            report.certificates["witness"] = {
                "cylinder": word_text(status.witness.cylinder),
                "elements": [element_text(context, n) for n in status.witness.elements],
                "point": str(status.witness.point),
            }
        if status.nonregular_witness is not None:
            report.certificates["nonregular_open_set"] = [
                cell_dict(context, cell) for cell in status.nonregular_witness
            ]
        codes = {D0Verdict.NONEMPTY: 0, D0Verdict.EMPTY: 1, D0Verdict.INCONCLUSIVE: 3}
        return report, codes[status.verdict]

    def regular_open_report(
        self, name: str, cells: Optional[str] = None, depth: Optional[int] = None, **overrides: Optional[int]
    ) -> Tuple[Report, int]:
        report = self._report("regular-open", file=name, cells=cells, depth=depth)
        context = self.context(name, **overrides)
        if cells is None:
            with self._timed(report, "regular_open"):
                witness = find_nonregular_witness(context, depth)
            report.verdicts["regular_open"] = witness is None
            if witness is not None:
                report.certificates["nonregular_open_set"] = [cell_dict(context, cell) for cell in witness]
            return report, 0 if witness is None else 1

        element = parse_algebra(context, cells, RingTag(0))
        compact_open = CompactOpenSet(tuple(element.cells))
        with self._timed(report, "regular_open"):
            verdict = regular_open(context, compact_open, depth)
        report.verdicts["regular_open"] = verdict
        return report, 0 if verdict else 1

    # Algebra -------------------------------------------------------------

    def eval_report(self, name: str, elem: str, germ: str, t: int = 0, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("eval", file=name, elem=elem, germ=germ, t=t)
        context = self.context(name, **overrides)
        try:
            ring = RingTag(t)
        except ValueError as exc:
            raise LiteralParseError(str(exc)) from exc
        f = parse_algebra(context, elem, ring)
        target = parse_germ(context, germ)
        with self._timed(report, "eval"):
            value = evaluate(context, f, target)
            classes = support_partition(context, f)
            singular = is_singular(context, f)
            zero = is_zero(context, f)
        report.verdicts["value"] = scalar_value(value)
        report.verdicts["singular"] = singular
        report.verdicts["zero"] = zero
        report.certificates["ring"] = str(ring)
        report.certificates["support"] = [
            {
                "frame": word_text(entry.v),
                "range": word_text(entry.u),
                "terms": list(entry.members),
                "value": scalar_value(entry.value),
                "sample": point_text(entry.sample),
            }
            for entry in classes
            if not ring.is_zero(entry.value)
        ]
        return report, 0

    def singular_search_report(
        self,
        name: str,
        t: int,
        max_n: Optional[int] = None,
        ball: Optional[int] = None,
        depth: Optional[int] = None,
        **overrides: Optional[int],
    ) -> Tuple[Report, int]:
        report = self._report("singular-search", file=name, t=t, max_n=max_n, ball=ball, depth=depth)
        context = self.context(name, **overrides)
        with self._timed(report, "search"):
            outcome = search_witness(context, t, max_n, ball, depth)
        report.verdicts["witness_found"] = outcome.found
        report.certificates["candidates_checked"] = outcome.candidates_checked
        report.certificates["budget"] = dict(zip(("max_n", "ball", "depth"), outcome.budget))
        if outcome.witness is None:
            report.verdicts["outcome"] = "none_at_budget"
            return report, 1

        witness = outcome.witness
        with self._timed(report, "build"):
            f = build_singular(context, witness)
        names = [element_text(context, g) for g in witness.candidate.elements]
        report.verdicts["outcome"] = "witness"
        report.certificates["witness"] = {
            "elements": names,
            "V": [word_text(tail) for tail in witness.candidate.tails],
            "patterns": [[names[i] for i in sorted(pattern)] for pattern in witness.family.patterns],
            "kernel": [scalar_value(value) for value in witness.kernel],
        }
        report.certificates["element"] = format_algebra(context, f)
        return report, 0

    def simplicity_report(self, name: str, p: int, **overrides: Optional[int]) -> Tuple[Report, int]:
        report = self._report("simplicity", file=name, char=p)
        context = self.context(name, **overrides)
        with self._timed(report, "simplicity"):
            result = simplicity_report(context, p)
        report.verdicts["verdict"] = result.verdict.value
        report.verdicts["level_transitive"] = result.level_transitive
        report.verdicts["effectiveness_violations"] = len(result.violations)
        report.verdicts["witness_found"] = result.search.found
        if result.complex_singular_nonzero is not None:
            report.verdicts["complex_singular_ideal_nonzero"] = result.complex_singular_nonzero
        report.certificates["level_orbits"] = [{"level": level, "orbit": size} for level, size in result.level_orbits]
        report.certificates["violations"] = [
            {"element": element_text(context, v.element), "cylinder": word_text(v.cylinder)} for v in result.violations
        ]
        if result.singular_element is not None:
            report.certificates["singular_element"] = format_algebra(context, result.singular_element)
        codes = {
            SimplicityVerdict.CONSISTENT_WITH_SIMPLE: 0,
            SimplicityVerdict.NOT_SIMPLE: 1,
            SimplicityVerdict.INCONCLUSIVE: 3,
        }
        return report, codes[result.verdict]
