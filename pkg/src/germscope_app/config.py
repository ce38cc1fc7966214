from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

PROJECT_ROOT = Path(__file__).resolve().parent
BUNDLED_CORPUS_DIR = PROJECT_ROOT / "corpus"
SCHEMA_PATH = PROJECT_ROOT / "schema" / "report.schema.json"


def get_env_value(key: str, default: Optional[str] = None) -> Optional[str]:
    """Read ``key`` from the environment, lowercase spelling first."""
    for candidate in dict.fromkeys((key.lower(), key.upper())):
        value = os.environ.get(candidate)
        if value:
            return value
    return default


def _get_bool(key: str, default: bool) -> bool:
    raw_value = get_env_value(key)
    return default if raw_value is None else raw_value.strip().lower() in {"1", "true", "yes", "on"}


def _get_int(key: str, default: int) -> int:
    try:
        return int(get_env_value(key, str(default)))
    except ValueError:
        return default


class Config:
    LOG_LEVEL = (get_env_value("log_level", "INFO") or "INFO").upper()
    CORPUS_DIR = get_env_value("germscope_corpus_dir", str(BUNDLED_CORPUS_DIR))
    REPORT_SCHEMA_VERSION = "1.0"
    REPORT_TIMINGS = _get_bool("report_timings", True)
    RANDOM_SEED = _get_int("random_seed", 20240517)

    # Budgets ---------------------------------------------------------
    TRIVIAL_NODE_BUDGET = _get_int("trivial_node_budget", 1_000_000)
    NUCLEUS_MAX_ELEMS = _get_int("nucleus_max_elems", 512)
    NUCLEUS_MAX_DEPTH = _get_int("nucleus_max_depth", 64)
    REGION_MAX_STATES = _get_int("region_max_states", 20000)
    SEARCH_MAX_N = _get_int("search_max_n", 4)
    SEARCH_BALL = _get_int("search_ball", 2)
    SEARCH_CYL_DEPTH = _get_int("search_cyl_depth", 2)
    LEVEL_DEPTH = _get_int("level_depth", 8)
    REGULAR_OPEN_DEPTH = _get_int("regular_open_depth", 2)
    D0_DEPTH = _get_int("d0_depth", 3)
    D0_MAX_SUBSETS = _get_int("d0_max_subsets", 4096)
