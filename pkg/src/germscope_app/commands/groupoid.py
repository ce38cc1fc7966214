from __future__ import annotations

import click
from flask import Blueprint

from .common import toolkit_command

bp = Blueprint("groupoid", __name__, cli_group=None)


@bp.cli.command("dangerous")
@click.argument("file")
@click.argument("point")
@toolkit_command
def dangerous_command(toolkit, overrides, file, point):
    """Decide whether POINT carries non-Hausdorff germs (exit 0 when it does)."""
    return toolkit.dangerous_report(file, point, **overrides)


@bp.cli.command("fiber")
@click.argument("file")
@click.argument("point")
@toolkit_command
def fiber_command(toolkit, overrides, file, point):
    """List the Hausdorff-cover points over POINT with their realizing patterns."""
    return toolkit.fiber_report(file, point, **overrides)


@bp.cli.command("d0")
@click.argument("file")
@click.option("--depth", type=int, default=None, help="Cylinder depth for the non-regular-open search.")
@toolkit_command
def d0_command(toolkit, overrides, file, depth):
    """Decide whether the singular part of the cover is nonempty (exit 0 when it is)."""
    return toolkit.d0_report(file, depth, **overrides)


@bp.cli.command("regular-open")
@click.argument("file")
@click.argument("cells", required=False)
@click.option("--depth", type=int, default=None, help="Extra refinement depth, or the cylinder depth of the witness search.")
@toolkit_command
def regular_open_command(toolkit, overrides, file, cells, depth):
    """Check that the union of CELLS ("[u|g|v|W] + ...") is regular open.

    Without CELLS, search nucleus cells up to --depth for a compact open set
    that is not regular open. Exit 0 when everything checked is regular open.
    """
    return toolkit.regular_open_report(file, cells, depth, **overrides)
