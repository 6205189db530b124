"""
Logging configuration for nsde-bounds.

This module handles logging setup and configuration:
- File and console logging handlers
- Log level management
- Format customization (including JSON)
- Structured logging support for solver and sampler diagnostics

Console output goes to stderr: stdout carries the JSON result of a run.
"""

import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict

import numpy as np

from ..config.models import LoggingConfig

ROOT_LOGGER_NAME = "nsde-bounds"


def _json_default(value: Any) -> Any:
    """numpy scalars and arrays as plain numbers and lists; anything else as str."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class JSONFormatter(logging.Formatter):
    """One JSON object per record, with structured fields merged at the top level."""

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "thread": record.threadName,
        }
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)
        log_data.update(getattr(record, "extra_fields", {}))
        return json.dumps(log_data, default=_json_default)


def setup_logging(config: LoggingConfig, json_format: bool = False) -> logging.Logger:
    """
    Configure the root logger for a run.

    Existing root handlers are replaced, so repeated calls do not duplicate output.

    Args:
        config: Logging configuration
        json_format: Force JSON records; ``config.json_format`` switches them on as well

    Returns:
        The "nsde-bounds" logger
    """
    level = getattr(logging, config.level.upper())
    use_json = json_format or config.json_format
    formatter: logging.Formatter = JSONFormatter() if use_json else logging.Formatter(config.format)

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.file:
        log_file = os.path.abspath(config.file)
        os.makedirs(os.path.dirname(log_file), exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_file))

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)

    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.debug(f"Logging initialized (format: {'JSON' if use_json else 'text'})")
    return logger


class StructuredLoggerAdapter(logging.LoggerAdapter):
    """Adapter that turns keyword arguments into structured fields.

    ``slog.info("penalty raised", rho=1e4)`` attaches ``{"rho": 1e4}`` to the record.
    """

    _RESERVED = ("extra", "exc_info", "stack_info", "stacklevel")

    def process(self, msg: str, kwargs: Dict[str, Any]) -> tuple:
        extra = kwargs.get("extra", {})
        fields = extra.setdefault("extra_fields", {})
        for key in [k for k in kwargs if k not in self._RESERVED]:
            fields[key] = kwargs.pop(key)
        kwargs["extra"] = extra
        return msg, kwargs


def get_structured_logger(name: str) -> StructuredLoggerAdapter:
    """Structured logger for a component, nested under the "nsde-bounds" namespace."""
    if not name.startswith(ROOT_LOGGER_NAME):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return StructuredLoggerAdapter(logging.getLogger(name), {})
