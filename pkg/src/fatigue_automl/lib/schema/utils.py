"""Utility functions for schema validation."""

import logging
from collections.abc import Callable
from functools import wraps

from pandera.errors import SchemaError, SchemaErrors

logger = logging.getLogger(__name__)


def schema_error_handler(func: Callable) -> Callable:
    """Custom error handler for the schema validation errors.

    Use as decorator to wrap pa.check_types decorator. Logs the failing function and the
    failure cases before re-raising.
    """

    @wraps(func)
    def wrapper(*args, **kwargs):  # noqa: ANN201, ANN002, ANN003
        try:
            return func(*args, **kwargs)
        except SchemaErrors as e:
            logger.error(
                f"{func.__qualname__} produced a table failing its schema:\n"
                f"{e.failure_cases}"
            )
            raise e
        except SchemaError as e:
            logger.error(f"{func.__qualname__} produced a table failing its schema: {e}")
            raise e

    return wrapper
