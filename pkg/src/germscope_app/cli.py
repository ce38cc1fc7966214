from __future__ import annotations

import sys
from typing import List, Optional, Sequence

import click
from flask.cli import FlaskGroup


def build_cli() -> FlaskGroup:
    from . import create_app

    return FlaskGroup(
        name="germscope",
        create_app=lambda: create_app(),
        add_default_commands=False,
        load_dotenv=False,
        help="Germ groupoids and Steinberg algebras of self-similar groups.",
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code: 0/1 verdicts, 2 parse errors, 3 exhausted budgets."""
    args: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        result = build_cli().main(args, prog_name="germscope", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else 0
