#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(payload: Any) -> str:
    """Serializes the payload as JSON with sorted keys and no whitespace.

    Args:
        payload (Any): A JSON-serializable object.

    Returns:
        str: The canonical JSON text.
    """
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def stable_hash(payload: Any) -> str:
    """Returns the SHA-256 hex digest of the canonical JSON form of the payload.

    Args:
        payload (Any): A JSON-serializable object.

    Returns:
        str: The hex digest.
    """
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
