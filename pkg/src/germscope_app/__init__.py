from __future__ import annotations

import logging

from flask import Flask

from .commands import algebra_bp, automata_bp, groupoid_bp, selftest_bp
from .config import Config
from .services.toolkit import ToolkitHandler


def create_app(config_class: type[Config] = Config) -> Flask:
    app = Flask(__name__)
    app.config.from_object(config_class)

    _configure_logging(app)
    _initialize_services(app)

    # Command blueprints ----------------------------------------------
    app.register_blueprint(automata_bp)
    app.register_blueprint(groupoid_bp)
    app.register_blueprint(algebra_bp)
    app.register_blueprint(selftest_bp)

    return app


def _configure_logging(app: Flask) -> None:
    log_level_name = (app.config.get("LOG_LEVEL") or "INFO").upper()
    log_level = getattr(logging, log_level_name, logging.INFO)

    # Reports go to stdout; log records stay on the package logger's stderr handler
    package_logger = logging.getLogger("germscope_app")
    package_logger.setLevel(log_level)
    package_logger.propagate = False
    if not package_logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("[%(asctime)s] %(levelname)s in %(name)s: %(message)s"))
        package_logger.addHandler(handler)


def _initialize_services(app: Flask) -> ToolkitHandler:
    toolkit = ToolkitHandler(logger=logging.getLogger("germscope_app.toolkit"), app_config=app.config)
    app.extensions["toolkit"] = toolkit
    return toolkit


__all__ = ["create_app"]
