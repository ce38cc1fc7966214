from __future__ import annotations

from functools import wraps
from typing import Callable

import click
from flask import current_app

from ..services.automaton import AutomatonParseError, BudgetExceeded, LiteralParseError
from ..services.groupoid import IncompatibleBase
from ..services.nucleus import Inconclusive
from ..services.reports import Report, render_text
from ..services.steinberg import RingMismatch

EXIT_PARSE_ERROR = 2
EXIT_BUDGET = 3

_BUDGET_FLAGS = {
    "max_states": "region_max_states",
    "max_elems": "nucleus_max_elems",
    "trivial_budget": "trivial_nodes",
}


class ToolkitFailure(click.ClickException):
    """Raised when a command stops on a parse error or an exhausted budget."""

    def __init__(self, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def emit(report: Report, as_json: bool) -> None:
    if as_json:
        click.echo(current_app.json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(render_text(report))


def toolkit_command(view: Callable) -> Callable:
    """Run ``view(toolkit, overrides, **params)``, print its report and exit with its verdict code."""

    @wraps(view)
    def wrapped(*args, as_json: bool = False, max_states=None, max_elems=None, trivial_budget=None, **kwargs):
        toolkit = current_app.extensions["toolkit"]
        flags = {"max_states": max_states, "max_elems": max_elems, "trivial_budget": trivial_budget}
        overrides = {_BUDGET_FLAGS[flag]: value for flag, value in flags.items() if value is not None}
        try:
            report, code = view(toolkit, overrides, *args, **kwargs)
        except (AutomatonParseError, LiteralParseError, IncompatibleBase, RingMismatch) as exc:
            raise ToolkitFailure(str(exc), EXIT_PARSE_ERROR) from exc
        except (BudgetExceeded, Inconclusive) as exc:
            toolkit.logger.warning("Computation stopped: %s", exc)
            raise ToolkitFailure(str(exc), EXIT_BUDGET) from exc
        emit(report, as_json)
        click.get_current_context().exit(code)

    wrapped = click.option("--trivial-budget", type=int, default=None, help="Node budget for the word problem.")(wrapped)
    wrapped = click.option("--max-elems", type=int, default=None, help="Element budget for the nucleus search.")(wrapped)
    wrapped = click.option("--max-states", type=int, default=None, help="State budget for region automata.")(wrapped)
    wrapped = click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")(wrapped)
    return wrapped

