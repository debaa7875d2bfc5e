#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from libdemark.harness.cli import main

main()
