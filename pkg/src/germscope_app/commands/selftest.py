from __future__ import annotations

from flask import Blueprint

from ..services.selftest import selftest_report
from .common import toolkit_command

bp = Blueprint("selftest", __name__, cli_group=None)


@bp.cli.command("selftest")
@toolkit_command
def selftest_command(toolkit, overrides):
    """Run the acceptance checks over the bundled corpus."""
    return selftest_report(toolkit)
