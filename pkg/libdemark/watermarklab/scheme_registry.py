#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING

from libdemark.liblog import liblog
from libdemark.utils.exceptions import ConfigError, RegistryError
from libdemark.watermarklab.config import MIN_MESSAGE_LENGTH
from libdemark.watermarklab.scheme import DetectFn, EmbedFn, ExternalScheme, ReferenceScheme, WatermarkScheme

if TYPE_CHECKING:
    from libdemark.watermarklab.watermarker import Watermarker

REFERENCE_SCHEME = "reference"

_external_schemes: dict[str, ExternalScheme] = {}


def register_external_scheme(name: str, embed_fn: EmbedFn, detect_fn: DetectFn, message_length: int) -> None:
    """Makes a scheme given as plain functions available to the harness by name.

    Args:
        name (str): The scheme name. Must be unused.
        embed_fn (EmbedFn): Maps (image, message) to the watermarked image.
        detect_fn (DetectFn): Maps an image to its bits, or to (bits, logits).
        message_length (int): The number of bits the scheme embeds.
    """
    if name == REFERENCE_SCHEME or name in _external_schemes:
        raise RegistryError(f"A watermarking scheme named {name!r} is already registered.")

    if message_length < MIN_MESSAGE_LENGTH:
        raise ConfigError(f"Scheme messages must be at least {MIN_MESSAGE_LENGTH} bits, got {message_length}.")

    _external_schemes[name] = ExternalScheme(name, embed_fn, detect_fn, message_length)
    liblog.watermark(f"Registered external scheme {name} ({message_length} bits).")


def unregister_external_scheme(name: str) -> None:
    """Removes an external scheme."""
    if name not in _external_schemes:
        raise RegistryError(f"No external scheme named {name!r} is registered.")

    del _external_schemes[name]


def registered_schemes() -> list[str]:
    """Returns every resolvable scheme name."""
    return [REFERENCE_SCHEME, *sorted(_external_schemes)]


def resolve_scheme(name: str, watermarker: Watermarker | None = None) -> WatermarkScheme:
    """Returns the scheme registered under the given name.

    Args:
        name (str): The scheme name.
        watermarker (Watermarker, optional): The trained scheme backing "reference". Defaults to None.

    Returns:
        WatermarkScheme: The resolved scheme.
    """
    if name == REFERENCE_SCHEME:
        if watermarker is None:
            raise ConfigError("The reference scheme needs a trained watermarker.")

        return ReferenceScheme(watermarker)

    if name in _external_schemes:
        return _external_schemes[name]

    raise RegistryError(f"Unknown watermarking scheme {name!r}; available: {registered_schemes()}.")
