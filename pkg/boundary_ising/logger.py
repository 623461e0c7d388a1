"""
Structured logging for the solver

Diagnostics go to stderr (stdout carries results); JSON lines go to the log
directory: app.log for library modules, computations.log with one record per
top-level computation, errors.log for failed computations.
"""
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

load_dotenv()

LOGS_DIR = Path(os.getenv("ISING_LOG_DIR", "logs"))
LOGS_DIR.mkdir(parents=True, exist_ok=True)

LOG_LEVEL = os.getenv("ISING_LOG_LEVEL", "INFO").upper()
RESULT_PREVIEW = 500


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JSONFormatter(logging.Formatter):
    """One JSON object per record; `extra_data` is merged in"""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            'timestamp': _utc_now(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno,
            'thread': record.threadName,
        }
        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)
        if hasattr(record, 'extra_data'):
            log_data.update(record.extra_data)
        return json.dumps(log_data, default=str)


def _file_handler(filename: str, level: int = logging.DEBUG) -> logging.Handler:
    handler = logging.FileHandler(LOGS_DIR / filename)
    handler.setLevel(level)
    handler.setFormatter(JSONFormatter())
    return handler


def get_logger(name: str) -> logging.Logger:
    """
    Get or create a module logger: console on stderr, JSON to app.log

    Args:
        name: Logger name (typically __name__)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(LOG_LEVEL)
    console_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    ))
    logger.addHandler(console_handler)
    logger.addHandler(_file_handler('app.log', logging.INFO))
    return logger


def _sink(name: str, filename: str, level: int) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False
    if not logger.handlers:
        logger.addHandler(_file_handler(filename))
    return logger


computation_logger = _sink('computations', 'computations.log', logging.INFO)
error_logger = _sink('errors', 'errors.log', logging.ERROR)


def log_computation(
    operation: str,
    params: Dict[str, Any],
    result: Any,
    latency_ms: float,
    success: bool,
    error: Optional[str] = None
):
    """
    Log one computation in structured format

    Args:
        operation: Operation name (e.g. "partition")
        params: Input parameters
        result: Headline result, truncated to RESULT_PREVIEW characters
        latency_ms: Wall time in milliseconds
        success: Whether the computation succeeded
        error: Error message if failed
    """
    rendered = json.dumps(result, default=str)
    if len(rendered) > RESULT_PREVIEW:
        rendered = rendered[:RESULT_PREVIEW] + '...'
    log_data = {
        'timestamp': _utc_now(),
        'operation': operation,
        'params': params,
        'result': rendered,
        'latency_ms': latency_ms,
        'success': success,
    }
    if error:
        log_data['error'] = error
    computation_logger.info(json.dumps(log_data, default=str))


def log_error(operation: str, error: Dict[str, Any]) -> None:
    """Record a failed computation (an IsingError.to_dict()) in errors.log"""
    error_logger.error(
        f"{operation} failed: {error.get('code')}",
        extra={'extra_data': {'operation': operation, 'error': error}},
    )
