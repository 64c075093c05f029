import logging
import time
from functools import wraps
from typing import Callable

from app.core.config import settings
from app.core.errors import LtridpError

logger = logging.getLogger(__name__)


def log_command(func: Callable[..., int]) -> Callable[..., int]:
    """A decorator that logs a CLI command and turns library errors into exit codes."""
    @wraps(func)
    def wrapper(args, *more, **kwargs) -> int:
        command = func.__name__.removeprefix("cmd_")
        logger.info(f"Running '{command}'.")
        started = time.perf_counter()
        try:
            code = func(args, *more, **kwargs)
        except LtridpError as e:
            logger.error(settings.messages.command_failed.format(command=command, error=e))
            return e.exit_code
        except Exception as e:
            logger.error(settings.messages.command_failed.format(command=command, error=e), exc_info=True)
            return 1
        logger.info(f"'{command}' finished with exit code {code} in {time.perf_counter() - started:.2f}s.")
        return code
    return wrapper
