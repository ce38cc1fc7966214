from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from .automaton import EvPeriodicWord, FiniteWord, GroupElement, format_word
from .context import GroupContext
from .groupoid import Cell, CoverPoint, PhasePattern

SCHEMA_VERSION = "1.0"


@dataclass
class Report:
    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    verdicts: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "inputs": self.inputs,
            "verdicts": self.verdicts,
            "certificates": self.certificates,
            "timings": self.timings,
        }


def render_text(report: Report) -> str:
    """Human-readable view of a report. Never parsed back."""
    lines: List[str] = [f"{report.command}"]
    for title, section in (("inputs", report.inputs), ("verdicts", report.verdicts), ("certificates", report.certificates)):
        if not section:
            continue
        lines.append(f"{title}:")
        for key, value in section.items():
            lines.extend(_render_value(key, value, indent=2))
    if report.timings:
        timing = ", ".join(f"{key} {value:.3f}s" for key, value in report.timings.items())
        lines.append(f"timings: {timing}")
    return "\n".join(lines)


def _render_value(key: str, value: Any, indent: int) -> List[str]:
    pad = " " * indent
    if isinstance(value, dict):
        lines = [f"{pad}{key}:"]
        for inner_key, inner_value in value.items():
            lines.extend(_render_value(inner_key, inner_value, indent + 2))
        return lines
    if isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        lines = [f"{pad}{key}:"]
        for index, item in enumerate(value):
            lines.extend(_render_value(f"- [{index}]", item, indent + 2))
        return lines
    if isinstance(value, list):
        return [f"{pad}{key}: {', '.join(str(item) for item in value) if value else '(none)'}"]
    return [f"{pad}{key}: {value}"]


# Serializers ---------------------------------------------------------------


def word_text(word: Sequence[int]) -> str:
    return format_word(word) or "ε"


def point_text(point: Optional[EvPeriodicWord]) -> Optional[str]:
    return str(point) if point is not None else None


def scalar_value(value: Any) -> Any:
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return int(value) if isinstance(value, int) else value


def element_text(context: GroupContext, g: GroupElement) -> str:
    return context.name(g)


def cell_dict(context: GroupContext, cell: Cell) -> Dict[str, Any]:
    return {
        "u": format_word(cell.u),
        "g": context.automaton.format_element(cell.g),
        "v": format_word(cell.v),
        "tails": [format_word(tail) for tail in cell.tails],
    }


def tails_text(tails: Sequence[FiniteWord]) -> List[str]:
    return [word_text(tail) for tail in tails]


def phase_dict(context: GroupContext, phase: PhasePattern) -> Dict[str, Any]:
    return {
        "depth": phase.depth,
        "tracked": [element_text(context, m) for m in phase.tracked],
        "word": format_word(phase.word),
        "open": phase.open,
        "sample": str(phase.sample),
    }


def cover_point_dict(context: GroupContext, cover_point: CoverPoint, phases: Sequence[PhasePattern] = ()) -> Dict[str, Any]:
    return {
        "base": str(cover_point.base),
        "depth": cover_point.depth,
        "members": [element_text(context, m) for m in cover_point.members],
        "phases": [phase_dict(context, phase) for phase in phases],
    }
