from __future__ import annotations

import dataclasses
import logging
import threading
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .automaton import Automaton, ElementTable, GroupElement
from .nucleus import ContractionCertificate, Nucleus, NucleusBudget, compute_nucleus
from .regsets import RegionCompiler


@dataclass(frozen=True)
class Budgets:
    trivial_nodes: int = 1_000_000
    nucleus_max_elems: int = 512
    nucleus_max_depth: int = 64
    region_max_states: int = 20000
    search_max_n: int = 4
    search_ball: int = 2
    search_cyl_depth: int = 2
    level_depth: int = 8
    regular_open_depth: int = 2
    d0_depth: int = 3
    d0_max_subsets: int = 4096

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "Budgets":
        defaults = cls()

        def _coerce_int(key: str, fallback: int) -> int:
            value = config.get(key)
            if value in (None, ""):
                return fallback
            try:
                return int(value)
            except (TypeError, ValueError):
                return fallback

        return cls(
            trivial_nodes=_coerce_int("TRIVIAL_NODE_BUDGET", defaults.trivial_nodes),
            nucleus_max_elems=_coerce_int("NUCLEUS_MAX_ELEMS", defaults.nucleus_max_elems),
            nucleus_max_depth=_coerce_int("NUCLEUS_MAX_DEPTH", defaults.nucleus_max_depth),
            region_max_states=_coerce_int("REGION_MAX_STATES", defaults.region_max_states),
            search_max_n=_coerce_int("SEARCH_MAX_N", defaults.search_max_n),
            search_ball=_coerce_int("SEARCH_BALL", defaults.search_ball),
            search_cyl_depth=_coerce_int("SEARCH_CYL_DEPTH", defaults.search_cyl_depth),
            level_depth=_coerce_int("LEVEL_DEPTH", defaults.level_depth),
            regular_open_depth=_coerce_int("REGULAR_OPEN_DEPTH", defaults.regular_open_depth),
            d0_depth=_coerce_int("D0_DEPTH", defaults.d0_depth),
            d0_max_subsets=_coerce_int("D0_MAX_SUBSETS", defaults.d0_max_subsets),
        )

    def replace(self, **changes: Optional[int]) -> "Budgets":
        return dataclasses.replace(self, **{key: value for key, value in changes.items() if value is not None})

    @property
    def nucleus(self) -> NucleusBudget:
        return NucleusBudget(max_elems=self.nucleus_max_elems, max_depth=self.nucleus_max_depth)


class GroupContext:
    """Shared state for one automaton: interning table, region compiler and the lazily computed nucleus."""

    def __init__(
        self,
        automaton: Automaton,
        budgets: Budgets = Budgets(),
        logger: Optional[logging.Logger] = None,
    ) -> None:
        self.automaton = automaton
        self.budgets = budgets
        self.logger = logger or logging.getLogger("germscope_app.context")
        self.table = ElementTable(automaton)
        self.regions = RegionCompiler(self.table, max_states=budgets.region_max_states, logger=self.logger)
        self._certificate: Optional[ContractionCertificate] = None
        self._lock = threading.Lock()

    @property
    def certificate(self) -> ContractionCertificate:
        with self._lock:
            if self._certificate is None:
                self._certificate = compute_nucleus(self.automaton, self.budgets.nucleus, table=self.table)
            return self._certificate

    @property
    def nucleus(self) -> Nucleus:
        return self.certificate.nucleus

    @property
    def letters(self) -> range:
        return self.automaton.letters

    def element(self, text: str) -> GroupElement:
        return self.automaton.parse_element(text)

    def canonical(self, g: GroupElement) -> GroupElement:
        return self.table.canonical(g)

    def name(self, g: GroupElement) -> str:
        """Nucleus name when ``g`` is a nucleus element, its literal otherwise."""
        index = self.nucleus.index_of(g)
        if index is not None:
            return self.nucleus.names[index]
        return self.automaton.format_element(g)
