from __future__ import annotations

import logging
from typing import Any

_FORMAT = "%(asctime)s %(levelname)s %(name)s [run_id=%(run_id)s] %(message)s"


class _RunIdDefault(logging.Filter):
    """Give records logged without correlation metadata a placeholder run id."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "run_id"):
            record.run_id = "-"
        return True


def get_logger(name: str = "vaxkit") -> logging.Logger:
    """Return a configured logger.

    The handler is installed once on the ``vaxkit`` logger; module loggers
    (``vaxkit.finetune.trainer`` and friends) propagate to it.
    """

    root = logging.getLogger("vaxkit")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_RunIdDefault())
        root.addHandler(handler)
        root.propagate = False
    return logging.getLogger(name)


def configure_logging(level: str | int = "INFO") -> logging.Logger:
    logger = get_logger()
    logger.setLevel(level.upper() if isinstance(level, str) else level)
    return logger


def log_with_correlation(
    logger: logging.Logger,
    level: int,
    message: str,
    *,
    run_id: str | None = None,
    **kwargs: Any,
) -> None:
    """Log a message including run correlation metadata."""

    extra = {"run_id": run_id or "-", **kwargs}
    logger.log(level, message, extra=extra)


__all__ = ["configure_logging", "get_logger", "log_with_correlation"]
