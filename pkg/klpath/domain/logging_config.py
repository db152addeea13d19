"""logging setup for the klpath command line and scripts"""
import logging
import sys
from pathlib import Path
from typing import Optional

from klpath.domain.errors import ConfigError
from klpath.domain.messages import Messages

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# chatty dependencies stay at warning whatever level klpath runs at
QUIET_LOGGERS = ("matplotlib", "PIL", "joblib", "fontTools")


def parse_level(log_level: str) -> int:
    """
    numeric level of a level name

    raises:
        ConfigError: not one of DEBUG, INFO, WARNING, ERROR, CRITICAL
    """
    level = logging.getLevelName(str(log_level).upper())
    if not isinstance(level, int):
        raise ConfigError(Messages.get("IO", "log_level", level=log_level))
    return level


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """
    route klpath diagnostics to stderr and an optional file

    stdout is left to results. the klpath loggers follow log_level, the
    dependencies in QUIET_LOGGERS never go below WARNING.

    args:
        log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        log_file: optional log file, parent directories are created

    returns:
        the klpath package logger

    raises:
        ConfigError: unknown level name
    """
    level = parse_level(log_level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers = [logging.StreamHandler(sys.stderr)]

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path, encoding='utf-8'))

    for handler in handlers:
        handler.setFormatter(formatter)
    logging.basicConfig(level=level, handlers=handlers, force=True)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    logger = logging.getLogger("klpath")
    logger.setLevel(level)
    logger.debug(f"logging at {logging.getLevelName(level)}{f', file {log_file}' if log_file else ''}")
    return logger
