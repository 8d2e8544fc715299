from .logging import configure_logging, get_logger, log_with_correlation
from .metrics import MetricsReporter

__all__ = ["MetricsReporter", "configure_logging", "get_logger", "log_with_correlation"]
