from __future__ import annotations

import pytest

from germscope_app import create_app
from germscope_app.config import BUNDLED_CORPUS_DIR, Config
from germscope_app.services.automaton import parse_automaton
from germscope_app.services.context import Budgets, GroupContext


class TestConfig(Config):
    LOG_LEVEL = "WARNING"
    CORPUS_DIR = str(BUNDLED_CORPUS_DIR)
    REPORT_TIMINGS = False
    SEARCH_BALL = 1
    SEARCH_CYL_DEPTH = 0


def load_context(name: str, budgets: Budgets = Budgets()) -> GroupContext:
    text = (BUNDLED_CORPUS_DIR / f"{name}.ssg").read_text(encoding="utf-8")
    return GroupContext(parse_automaton(text), budgets)


@pytest.fixture(scope="session")
def app():
    return create_app(TestConfig)


@pytest.fixture()
def runner(app):
    return app.test_cli_runner()


@pytest.fixture(scope="session")
def toolkit(app):
    return app.extensions["toolkit"]


@pytest.fixture(scope="session")
def grigorchuk() -> GroupContext:
    return load_context("grigorchuk")


@pytest.fixture(scope="session")
def erschler() -> GroupContext:
    return load_context("grigorchuk_erschler")


@pytest.fixture(scope="session")
def odometer() -> GroupContext:
    return load_context("odometer")


@pytest.fixture(scope="session")
def gupta_sidki() -> GroupContext:
    return load_context("gupta_sidki3")
