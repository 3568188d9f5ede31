#!/usr/bin/env python3
"""
Structured logging configuration for asdgic-lattice.

Provides consistent logging across all scripts with:
- Multiple output formats (text/JSON)
- Structured context (extra fields)
- File and console output

Console output goes to stderr: stdout is reserved for table data, which must
stay byte-identical across repeated runs.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, TextIO

# Marks handlers installed by setup_logging
MANAGED_ATTR = "_asdgic_managed"

# Attributes every LogRecord carries; anything else arrived through ``extra``.
_RESERVED_ATTRS = frozenset(
    vars(logging.LogRecord("", logging.INFO, "", 0, "", (), None)).keys()
) | {"message", "asctime", "extra_data"}


def _extra_fields(record: logging.LogRecord) -> Dict[str, Any]:
    fields = {k: v for k, v in vars(record).items() if k not in _RESERVED_ATTRS}
    fields.update(getattr(record, "extra_data", {}))
    return fields


class JSONFormatter(logging.Formatter):
    """Format log records as JSON for machine parsing."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON.

        Args:
            record: Log record to format

        Returns:
            JSON string with log data
        """
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        # Fields from logger.info("msg", extra={'key': 'value'}) and ContextFilter
        log_data.update(_extra_fields(record))

        return json.dumps(log_data, default=str)


class ContextFilter(logging.Filter):
    """Add fixed context (e.g. subcommand, seed) to every record."""

    def __init__(self, context: Optional[Dict[str, Any]] = None):
        super().__init__()
        self.context = context or {}

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "extra_data"):
            record.extra_data = {}
        record.extra_data.update(self.context)
        return True


class ColoredFormatter(logging.Formatter):
    """Add colors and trailing key=value context to console output."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
        "RESET": "\033[0m",
    }

    def __init__(self, *args, stream: Optional[TextIO] = None, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.stream = stream or sys.stderr

    def format(self, record: logging.LogRecord) -> str:
        """Format with colors if the target stream is a terminal.

        Args:
            record: Log record to format

        Returns:
            Formatted string
        """
        levelname = record.levelname
        if hasattr(self.stream, "isatty") and self.stream.isatty() and levelname in self.COLORS:
            record.levelname = f"{self.COLORS[levelname]}{levelname}{self.COLORS['RESET']}"
        try:
            text = super().format(record)
        finally:
            record.levelname = levelname
        fields = _extra_fields(record)
        if fields:
            text += " " + " ".join(f"{k}={v}" for k, v in sorted(fields.items()))
        return text


def setup_logging(
    name: str,
    level: int = logging.INFO,
    json_format: bool = False,
    log_file: Optional[str] = None,
    console_output: bool = True,
    context: Optional[Dict[str, Any]] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """Set up structured logging for a logger hierarchy.

    Args:
        name: Logger name ("" configures the root logger used by all modules)
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        json_format: Use JSON format instead of text (default: False)
        log_file: Optional file path to write JSON logs to
        console_output: Write logs to the console stream (default: True)
        context: Optional context dict to add to all log records
        stream: Console stream (default: stderr)

    Returns:
        Configured logger instance

    Example:
        >>> logger = setup_logging("", level=logging.DEBUG)
        >>> logger.info("Simulation finished", extra={"trials": 10000, "seed": 0})
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Replace handlers from an earlier call; foreign handlers (e.g. pytest capture) stay
    for handler in list(logger.handlers):
        if getattr(handler, MANAGED_ATTR, False):
            logger.removeHandler(handler)
            handler.close()

    context_filter = ContextFilter(context) if context else None

    if console_output:
        console_stream = stream or sys.stderr
        console_handler = logging.StreamHandler(console_stream)
        console_handler.setLevel(level)

        if json_format:
            console_handler.setFormatter(JSONFormatter())
        else:
            console_handler.setFormatter(
                ColoredFormatter(
                    "%(asctime)s [%(levelname)-8s] %(name)s:%(funcName)s:%(lineno)d - %(message)s",
                    datefmt="%Y-%m-%d %H:%M:%S",
                    stream=console_stream,
                )
            )
        if context_filter:
            console_handler.addFilter(context_filter)
        setattr(console_handler, MANAGED_ATTR, True)
        logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)

        # Always use JSON format for file logs (easier to parse)
        file_handler.setFormatter(JSONFormatter())
        if context_filter:
            file_handler.addFilter(context_filter)
        setattr(file_handler, MANAGED_ATTR, True)
        logger.addHandler(file_handler)

    if name:
        logger.propagate = False

    return logger


def level_from_name(name: str) -> int:
    """Map a level name ("DEBUG", "info", ...) to its logging constant.

    Raises:
        ValueError: Unknown level name
    """
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level '{name}'")
    return level
