"""
Logging setup: everything goes to stderr, stdout stays machine-readable.
"""

import logging
import sys

from utils.errors import ConfigError

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_configured = False


def _level_names() -> dict:
    # logging.getLevelNamesMapping() is Python 3.11+; it returns a copy of _nameToLevel
    if hasattr(logging, "getLevelNamesMapping"):
        return logging.getLevelNamesMapping()
    return dict(logging._nameToLevel)


def configure_logging(level: str = "INFO") -> None:
    global _configured
    name = level.upper()
    if name not in _level_names():
        raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger()
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        _configured = True
    root.setLevel(name)
