"""
Logger configuration for Gaussian Crowd
Structured JSON output so benchmark and render runs can be scraped by log tooling
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import List, Optional

from gaussian_crowd.config import LOG_LEVEL, LOG_FORMAT
from gaussian_crowd.constants import (
    LOG_CELL_SKIPPED,
    LOG_FRAME_RENDERED,
    LOG_UNKNOWN_CONFIG_KEY,
)

_RESERVED_RECORD_KEYS = {
    "name",
    "msg",
    "args",
    "levelname",
    "levelno",
    "pathname",
    "filename",
    "module",
    "lineno",
    "funcName",
    "created",
    "msecs",
    "relativeCreated",
    "thread",
    "threadName",
    "processName",
    "process",
    "taskName",
    "getMessage",
    "exc_info",
    "exc_text",
    "stack_info",
}

_PROMOTED_KEYS = (
    "stage",
    "template_id",
    "instance_count",
    "splat_count",
    "elapsed_ms",
    "path",
    "event_type",
)


class StructuredFormatter(logging.Formatter):
    """
    Structured JSON formatter, one object per line
    """

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as structured JSON"""
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        for key in _PROMOTED_KEYS:
            if hasattr(record, key):
                log_entry[key] = getattr(record, key)

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        for key, value in record.__dict__.items():
            if key not in _RESERVED_RECORD_KEYS and key not in log_entry:
                log_entry[key] = value

        return json.dumps(log_entry, ensure_ascii=False, default=str)


class CrowdLogger:
    """
    Centralized logger configuration for Gaussian Crowd
    """

    PACKAGE_LOGGERS = (
        "gaussian_crowd",
        "gaussian_crowd.formats",
        "gaussian_crowd.renderer",
        "gaussian_crowd.metrics",
        "gaussian_crowd.crowd",
    )

    @staticmethod
    def setup_logging(
        level: str = LOG_LEVEL,
        format_type: str = "structured",
        enable_console: bool = True,
        enable_file: bool = False,
        log_file_path: Optional[str] = None,
    ) -> None:
        """
        Setup logging configuration

        Args:
            level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            format_type: Format type - "structured" (JSON) or "simple" (text)
            enable_console: Enable console logging (stderr, stdout is kept for results)
            enable_file: Enable file logging
            log_file_path: Path to log file (required if enable_file=True)
        """
        numeric_level = getattr(logging, level.upper(), logging.INFO)

        if format_type == "structured":
            formatter: logging.Formatter = StructuredFormatter()
        else:
            formatter = logging.Formatter(LOG_FORMAT)

        handlers: List[logging.Handler] = []

        if enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(formatter)
            handlers.append(console_handler)

        if enable_file and log_file_path:
            file_handler = logging.FileHandler(log_file_path)
            file_handler.setFormatter(formatter)
            handlers.append(file_handler)

        logging.basicConfig(
            level=numeric_level,
            handlers=handlers,
            force=True,  # Override any existing configuration
        )

        CrowdLogger._configure_package_loggers(numeric_level, handlers)

    @staticmethod
    def _configure_package_loggers(level: int, handlers: list) -> None:
        """Attach handlers to the package loggers and stop double emission"""
        for name in CrowdLogger.PACKAGE_LOGGERS:
            package_logger = logging.getLogger(name)
            package_logger.setLevel(level)
            package_logger.handlers = handlers if name == "gaussian_crowd" else []
            package_logger.propagate = name != "gaussian_crowd"

    @staticmethod
    def get_logger(name: str) -> logging.Logger:
        """Get a logger instance"""
        return logging.getLogger(name)

    @staticmethod
    def log_event(
        logger: logging.Logger,
        level: int,
        message: str,
        event_type: str,
        **kwargs,
    ) -> None:
        """
        Log a pipeline event with structured data

        Args:
            logger: Logger instance
            level: Log level
            message: Log message
            event_type: Machine-readable event name
            **kwargs: Additional structured data
        """
        logger.log(level, message, extra={"event_type": event_type, **kwargs})


def get_crowd_logger(name: str) -> logging.Logger:
    """Get a package logger instance"""
    return CrowdLogger.get_logger(name)


def log_asset_loaded(
    logger: logging.Logger, message: str, path: str, template_id: str
) -> None:
    """Log a template or motion load"""
    CrowdLogger.log_event(
        logger,
        logging.INFO,
        message,
        "asset_loaded",
        path=path,
        template_id=template_id,
    )


def log_asset_saved(
    logger: logging.Logger, message: str, path: str, template_id: str
) -> None:
    """Log a template or motion save"""
    CrowdLogger.log_event(
        logger,
        logging.INFO,
        message,
        "asset_saved",
        path=path,
        template_id=template_id,
    )


def log_stage_timing(
    logger: logging.Logger, stage: str, elapsed_ms: float, **kwargs
) -> None:
    """Log the duration of one pipeline stage"""
    CrowdLogger.log_event(
        logger,
        logging.DEBUG,
        f"Stage {stage} took {elapsed_ms:.2f} ms",
        "stage_timing",
        stage=stage,
        elapsed_ms=round(elapsed_ms, 3),
        **kwargs,
    )


def log_frame_rendered(
    logger: logging.Logger,
    time_s: float,
    instance_count: int,
    splat_count: int,
    elapsed_ms: float,
) -> None:
    """Log completion of an end-to-end frame"""
    CrowdLogger.log_event(
        logger,
        logging.INFO,
        LOG_FRAME_RENDERED.format(time_s, splat_count, elapsed_ms),
        "frame_rendered",
        instance_count=instance_count,
        splat_count=splat_count,
        elapsed_ms=round(elapsed_ms, 3),
    )


def log_bench_cell(
    logger: logging.Logger,
    label: str,
    instance_count: int,
    splat_count: int,
    fps: float,
) -> None:
    """Log a finished benchmark cell"""
    CrowdLogger.log_event(
        logger,
        logging.INFO,
        f"Benchmark cell {label} x {instance_count}: {fps:.1f} FPS",
        "bench_cell",
        instance_count=instance_count,
        splat_count=splat_count,
        fps=round(fps, 3),
    )


def log_cell_skipped(
    logger: logging.Logger, label: str, instance_count: int, reason: str
) -> None:
    """Log a benchmark cell that could not run"""
    CrowdLogger.log_event(
        logger,
        logging.WARNING,
        LOG_CELL_SKIPPED.format(label, instance_count, reason),
        "bench_cell_skipped",
        instance_count=instance_count,
        reason=reason,
    )


def log_unknown_config_key(logger: logging.Logger, key: str, path: str) -> None:
    """Log a scene config key that is not part of the schema"""
    CrowdLogger.log_event(
        logger,
        logging.WARNING,
        LOG_UNKNOWN_CONFIG_KEY.format(key),
        "unknown_config_key",
        key=key,
        path=path,
    )
