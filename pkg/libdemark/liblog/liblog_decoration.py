#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from types import MethodType

from libdemark.liblog.liblog import ANSIColors, LibLog


def _make_header_logger(tag: str, color: str):
    header = f"[{color}{tag}{ANSIColors.DEFAULT_COLOR}]"

    def _log(self: LibLog, message: str, *args: str, **kwargs: str) -> None:
        """Log an info message to the general logger, prefixed by the subsystem header.

        Args:
            message (str): the message to log.
            *args: positional arguments to pass to the logger.
            **kwargs: keyword arguments to pass to the logger.
        """
        self.general_logger.info(f"{header} {message}", *args, **kwargs)

    return _log


def decorate_liblog(log_instance: LibLog) -> None:
    """Decorates the liblog instance with one header method per subsystem."""
    if getattr(log_instance, "_decorated", False):
        return

    log_instance.demark = MethodType(_make_header_logger("DEMARK", ANSIColors.CYAN), log_instance)
    log_instance.watermark = MethodType(_make_header_logger("WATERMARK", ANSIColors.MAGENTA), log_instance)
    log_instance.harness = MethodType(_make_header_logger("HARNESS", ANSIColors.YELLOW), log_instance)
    log_instance._decorated = True
