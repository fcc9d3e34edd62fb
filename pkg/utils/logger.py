# Unified logger for the stagcalc project
import logging
import os
import sys
from logging.handlers import RotatingFileHandler

# Determine log directory (relative to project root)
LOG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "logs")
os.makedirs(LOG_DIR, exist_ok=True)

LOG_FILE = os.path.join(LOG_DIR, "stagcalc.log")

# Modules log through getLogger(__name__), so the package loggers share the handlers
PACKAGE_LOGGERS = ["core", "managers", "utils"]

# Create logger instance
logger = logging.getLogger("stagcalc")
logger.setLevel(logging.INFO)

# Prevent duplicate handlers if this module is reloaded
if not logger.handlers:
    # File handler with rotation (5 MB per file, keep 5 backups)
    file_handler = RotatingFileHandler(LOG_FILE, maxBytes=5 * 1024 * 1024, backupCount=5, encoding="utf-8")
    file_formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    file_handler.setFormatter(file_formatter)

    # Console handler on stderr; stdout carries reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_formatter = logging.Formatter("%(levelname)s - %(message)s")
    console_handler.setFormatter(console_formatter)

    for name in ["stagcalc"] + PACKAGE_LOGGERS:
        package_logger = logging.getLogger(name)
        package_logger.setLevel(logging.DEBUG if name != "stagcalc" else logging.INFO)
        package_logger.propagate = False
        package_logger.addHandler(file_handler)
        package_logger.addHandler(console_handler)
    file_handler.setLevel(logging.INFO)
    console_handler.setLevel(logging.INFO)


def set_console_level(level: int) -> None:
    """Adjust console verbosity (--verbose / --quiet); the log file keeps INFO."""
    logger.setLevel(min(level, logging.INFO))
    for handler in logger.handlers:
        if not isinstance(handler, RotatingFileHandler):
            handler.setLevel(level)


# Export the logger for import elsewhere
__all__ = ["logger", "set_console_level"]
