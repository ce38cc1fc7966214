from __future__ import annotations

import click
from flask import Blueprint

from .common import toolkit_command

bp = Blueprint("automata", __name__, cli_group=None)


@bp.cli.command("nucleus")
@click.argument("file")
@toolkit_command
def nucleus_command(toolkit, overrides, file):
    """Compute the nucleus of a contracting automaton."""
    return toolkit.nucleus_report(file, **overrides)


@bp.cli.command("tf")
@click.argument("file")
@click.argument("element")
@click.argument("point")
@toolkit_command
def tf_command(toolkit, overrides, file, element, point):
    """Classify POINT against the fixed-word set of ELEMENT."""
    return toolkit.tf_report(file, element, point, **overrides)
