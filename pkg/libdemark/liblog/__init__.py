#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from libdemark.liblog.liblog import liblog
from libdemark.liblog.liblog_decoration import decorate_liblog

decorate_liblog(liblog)

__all__ = ["liblog"]
