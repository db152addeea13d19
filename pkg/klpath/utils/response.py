"""command error handling"""
import logging
import sys
from functools import wraps
from typing import Any, Callable

from klpath.domain.errors import KlPathError

logger = logging.getLogger(__name__)


def cli_error_handler(command: str) -> Callable[[Callable[..., int]], Callable[..., int]]:
    """decorator for consistent subcommand error handling"""
    def decorator(func: Callable[..., int]):
        """wrap a subcommand and turn exceptions into exit codes."""
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> int:
            """run the subcommand, printing a one-line diagnostic on failure."""
            try:
                return func(*args, **kwargs)
            except KlPathError as exc:
                logger.error("%s failed: %s", command, exc)
                print(f"klpath {command}: {exc}", file=sys.stderr)
                return exc.exit_code
            except Exception as exc:
                logger.error("error in %s: %s", command, exc, exc_info=True)
                print(f"klpath {command}: internal error: {exc}", file=sys.stderr)
                return 1
        return wrapper
    return decorator
