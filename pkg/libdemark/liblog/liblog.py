#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

"""The libdemark logger.

libdebug ships LibLog and ANSIColors, but libdebug is a process debugger and this package attaches
to no process, so it is not a dependency. The same singleton shape and header colours are rebuilt
here on top of the standard logging module, which libdebug's own LibLog wraps as well.
"""

from __future__ import annotations

import logging
import os
import sys


class ANSIColors:
    """ANSI escape codes used to tag log headers."""

    CYAN = "\033[36m"
    MAGENTA = "\033[35m"
    YELLOW = "\033[33m"
    DEFAULT_COLOR = "\033[39m"


class LibLog:
    """Singleton holder of the libdemark loggers."""

    _instance = None

    def __new__(cls, *args, **kwargs) -> LibLog:
        if cls._instance is None:
            cls._instance = super(LibLog, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self: LibLog) -> None:
        if self._initialized:
            return

        self.general_logger = logging.getLogger("libdemark")
        self.general_logger.propagate = False

        if not self.general_logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
            self.general_logger.addHandler(handler)

        self.set_level(os.environ.get("LIBDEMARK_LOG_LEVEL", "INFO"))
        self._initialized = True

    def set_level(self: LibLog, level: int | str) -> None:
        """Sets the level of the general logger.

        Args:
            level (int | str): A logging level or its name (e.g. "DEBUG").
        """
        if isinstance(level, str):
            level = logging.getLevelName(level.upper())

            if not isinstance(level, int):
                level = logging.INFO

        self.general_logger.setLevel(level)

    def debug(self: LibLog, message: str, *args: str, **kwargs: str) -> None:
        """Log a debug message to the general logger."""
        self.general_logger.debug(message, *args, **kwargs)

    def info(self: LibLog, message: str, *args: str, **kwargs: str) -> None:
        """Log an info message to the general logger."""
        self.general_logger.info(message, *args, **kwargs)

    def warning(self: LibLog, message: str, *args: str, **kwargs: str) -> None:
        """Log a warning message to the general logger."""
        self.general_logger.warning(message, *args, **kwargs)

    def error(self: LibLog, message: str, *args: str, **kwargs: str) -> None:
        """Log an error message to the general logger."""
        self.general_logger.error(message, *args, **kwargs)


liblog = LibLog()
