"""
Logging utilities for the Rendezvous & Docking MPC Simulator

Root logger configuration (console plus rotating run and error files),
loggers tagged with the run mode and seed, and wall-clock records of
closed-loop runs on the "performance" logger.
"""

import logging
import logging.handlers
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

RUN_LOG = "rvd_mpc.log"
ERROR_LOG = "errors.log"


def _rotating(path: Path, level: int, max_mb: int, backups: int,
              formatter: logging.Formatter) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(path, maxBytes=max_mb * 1024 * 1024, backupCount=backups,
                                                   encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logger(log_level: str = "INFO", log_to_file: bool = True,
                 log_to_console: bool = True, log_dir: Optional[Union[str, Path]] = None) -> None:
    """Configure the root logger for a simulator session.

    Args:
        log_level: Console level name (DEBUG, INFO, WARNING, ERROR)
        log_to_file: Also write the run log and the error log
        log_to_console: Echo records at log_level to stderr
        log_dir: Directory for log files; defaults to <project>/logs
    """
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {log_level}")

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if log_to_console:
        console = logging.StreamHandler()
        console.setLevel(level)
        console.setFormatter(formatter)
        root.addHandler(console)

    if log_to_file:
        log_path = Path(log_dir) if log_dir is not None else Path(__file__).parent.parent / "logs"
        log_path.mkdir(parents=True, exist_ok=True)
        root.addHandler(_rotating(log_path / RUN_LOG, logging.DEBUG, 20, 5, formatter))
        root.addHandler(_rotating(log_path / ERROR_LOG, logging.ERROR, 5, 3, formatter))


def get_logger(name: str) -> logging.Logger:
    """Logger for a module (usually __name__)."""
    return logging.getLogger(name)


class ContextLogger(logging.LoggerAdapter):
    """Logger that tags every message with run context, e.g. ``[mode=sampling | seed=3]``."""

    def __init__(self, logger_name: str, context: Optional[Mapping[str, Any]] = None):
        super().__init__(logging.getLogger(logger_name), dict(context or {}))

    def process(self, msg, kwargs):
        if not self.extra:
            return msg, kwargs
        tags = " | ".join(f"{key}={value}" for key, value in self.extra.items())
        return f"[{tags}] {msg}", kwargs


def performance_log(operation: str, duration: float, details: Optional[Dict[str, Any]] = None) -> None:
    """Record the wall-clock cost of an operation.

    Args:
        operation: Operation name, e.g. "closed_loop_run"
        duration: Wall-clock duration in seconds
        details: Extra fields; a "steps" entry adds a steps-per-second rate
    """
    details = dict(details or {})
    steps = details.get("steps")
    if steps and duration > 0:
        details["steps_per_s"] = round(steps / duration, 1)

    logging.getLogger("performance").info(
        f"PERFORMANCE: {operation} took {duration:.4f} s at {datetime.now().isoformat(timespec='seconds')} {details}"
    )
