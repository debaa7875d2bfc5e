#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations


class VersionStr(str):
    """String that represents a dotted version, such as a checkpoint format version."""

    def _numbers(self: VersionStr) -> list[int]:
        return [int(n) for n in self.split(".")]

    @staticmethod
    def _coerce(other: object) -> VersionStr:
        return other if isinstance(other, VersionStr) else VersionStr(str(other))

    def _compare(self: VersionStr, other: object) -> int:
        this_numbers = self._numbers()
        other_numbers = self._coerce(other)._numbers()

        # Missing components count as zero, so "1.0" == "1"
        width = max(len(this_numbers), len(other_numbers))
        this_numbers += [0] * (width - len(this_numbers))
        other_numbers += [0] * (width - len(other_numbers))

        for this, that in zip(this_numbers, other_numbers):
            if this < that:
                return -1
            elif this > that:
                return 1

        return 0

    @property
    def major(self: VersionStr) -> int:
        """Returns the major component of the version."""
        return self._numbers()[0]

    def is_compatible_with(self: VersionStr, other: object) -> bool:
        """Returns whether the two versions share the same major component."""
        return self.major == self._coerce(other).major

    def __eq__(self: VersionStr, other: object) -> bool:
        return self._compare(other) == 0

    def __ne__(self: VersionStr, other: object) -> bool:
        return self._compare(other) != 0

    def __lt__(self: VersionStr, other: object) -> bool:
        return self._compare(other) < 0

    def __gt__(self: VersionStr, other: object) -> bool:
        return self._compare(other) > 0

    def __le__(self: VersionStr, other: object) -> bool:
        return self._compare(other) <= 0

    def __ge__(self: VersionStr, other: object) -> bool:
        return self._compare(other) >= 0

    def __hash__(self: VersionStr) -> int:
        numbers = self._numbers()

        while len(numbers) > 1 and numbers[-1] == 0:
            numbers.pop()

        return hash(tuple(numbers))
