from __future__ import annotations

import click
from flask import Blueprint

from .common import toolkit_command

bp = Blueprint("algebra", __name__, cli_group=None)


@bp.cli.command("eval")
@click.argument("file")
@click.option("--elem", required=True, help="Element such as '[|b||] - 2*[0|a|1|]'.")
@click.option("--germ", required=True, help="Germ such as 'b@0(0)' or '[0|a|1]@1(0)'.")
@click.option("--t", "t", type=int, default=0, show_default=True, help="0 for Q, otherwise Z/t.")
@toolkit_command
def eval_command(toolkit, overrides, file, elem, germ, t):
    """Evaluate an algebra element at a germ and summarize its support."""
    return toolkit.eval_report(file, elem, germ, t, **overrides)


@bp.cli.command("singular-search")
@click.argument("file")
@click.option("--t", "t", type=int, default=0, show_default=True, help="0 for Q, otherwise Z/t.")
@click.option("--max-n", type=int, default=None, help="Largest number of bisections.")
@click.option("--ball", type=int, default=None, help="Radius of the element ball (0, 1 or 2).")
@click.option("--depth", type=int, default=None, help="Deepest source cylinder.")
@toolkit_command
def singular_search_command(toolkit, overrides, file, t, max_n, ball, depth):
    """Search for a witness that the singular ideal over R_t is nonzero (exit 0 when found)."""
    return toolkit.singular_search_report(file, t, max_n, ball, depth, **overrides)


@bp.cli.command("simplicity")
@click.argument("file")
@click.option("--char", "p", type=int, default=0, show_default=True, help="Field characteristic.")
@click.option("--max-n", type=int, default=None)
@click.option("--ball", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--level-depth", type=int, default=None, help="Deepest level for the transitivity check.")
@toolkit_command
def simplicity_command(toolkit, overrides, file, p, max_n, ball, depth, level_depth):
    """Collect simplicity evidence for the Steinberg algebra over a field of characteristic CHAR."""
    overrides.update(search_max_n=max_n, search_ball=ball, search_cyl_depth=depth, level_depth=level_depth)
    return toolkit.simplicity_report(file, p, **overrides)
