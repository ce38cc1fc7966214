from __future__ import annotations

from .algebra import bp as algebra_bp
from .automata import bp as automata_bp
from .groupoid import bp as groupoid_bp
from .selftest import bp as selftest_bp

__all__ = ["algebra_bp", "automata_bp", "groupoid_bp", "selftest_bp"]
