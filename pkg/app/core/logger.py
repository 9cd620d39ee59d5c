"""
Logging configuration for the ageing-orderings toolkit.

Console output goes to stderr so that reports printed on stdout stay
machine-readable.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _level(name: str) -> int:
    return getattr(logging, str(name).upper(), logging.INFO)


def _attach_file(target: logging.Logger, log_file: str) -> None:
    """Add a file handler for log_file unless one already writes there."""
    path = Path(log_file).resolve()
    for handler in target.handlers:
        if isinstance(handler, logging.FileHandler) and Path(handler.baseFilename) == path:
            return
    path.parent.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(path)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    target.addHandler(file_handler)


def setup_logger(
    name: str = "ageing_orders", level: str = "INFO", log_file: Optional[str] = None
) -> logging.Logger:
    """
    Create or fetch a named logger with a stderr handler.

    Args:
        name: Logger name
        level: Level name such as "INFO" or "DEBUG"
        log_file: Optional path of an additional log file

    Returns:
        Configured logger
    """
    named = logging.getLogger(name)
    named.setLevel(_level(level))

    # One stderr handler per logger, however often this is called
    if not any(type(h) is logging.StreamHandler for h in named.handlers):
        stderr_handler = logging.StreamHandler(sys.stderr)
        stderr_handler.setLevel(logging.DEBUG)
        stderr_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        named.addHandler(stderr_handler)

    if log_file:
        _attach_file(named, log_file)
    return named


def configure_logging(level: str, log_file: Optional[str] = None) -> None:
    """Apply a run's level and optional log file to the shared toolkit logger."""
    logger.setLevel(_level(level))
    if log_file:
        _attach_file(logger, log_file)


# Default logger instance
logger = setup_logger()
