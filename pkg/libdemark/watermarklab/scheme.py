#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from libdemark.metrics.latent import BitMessage
from libdemark.utils.exceptions import MetricDomainError

if TYPE_CHECKING:
    from libdemark.imagekit.image_tensor import ImageTensor
    from libdemark.watermarklab.watermarker import Watermarker

EmbedFn = Callable[["ImageTensor", BitMessage], "ImageTensor"]
DetectFn = Callable[["ImageTensor"], "BitMessage | tuple[BitMessage, np.ndarray]"]


class WatermarkScheme:
    """Represents a watermarking scheme the harness can embed with and detect with."""

    def __init__(self: WatermarkScheme, name: str, message_length: int) -> None:
        self.name = name
        self.message_length = message_length

    def embed(self: WatermarkScheme, x: ImageTensor, m: BitMessage) -> ImageTensor:
        raise NotImplementedError()

    def detect(self: WatermarkScheme, x: ImageTensor) -> tuple[BitMessage, np.ndarray]:
        raise NotImplementedError()

    def embed_batch(self: WatermarkScheme, images: Sequence[ImageTensor], messages: Sequence[BitMessage]) -> list[ImageTensor]:
        """Watermarks every image with its own message."""
        return [self.embed(x, m) for x, m in zip(images, messages)]

    def detect_batch(self: WatermarkScheme, images: Sequence[ImageTensor]) -> list[tuple[BitMessage, np.ndarray]]:
        """Detects the message of every image."""
        return [self.detect(x) for x in images]

    @property
    def scheme_type(self: WatermarkScheme) -> str:
        raise NotImplementedError()

    def __repr__(self: WatermarkScheme) -> str:
        return f"{self.name} | Type: {self.scheme_type} | {self.message_length} bits"


class ReferenceScheme(WatermarkScheme):
    """Represents the trainable residual scheme of watermarklab."""

    def __init__(self: ReferenceScheme, watermarker: Watermarker) -> None:
        super().__init__("reference", watermarker.message_length)
        self.watermarker = watermarker

    def embed(self: ReferenceScheme, x: ImageTensor, m: BitMessage) -> ImageTensor:
        return self.watermarker.embed(x, m)

    def detect(self: ReferenceScheme, x: ImageTensor) -> tuple[BitMessage, np.ndarray]:
        return self.watermarker.detect(x)

    def embed_batch(self: ReferenceScheme, images: Sequence[ImageTensor], messages: Sequence[BitMessage]) -> list[ImageTensor]:
        return self.watermarker.embed_batch(images, messages)

    def detect_batch(self: ReferenceScheme, images: Sequence[ImageTensor]) -> list[tuple[BitMessage, np.ndarray]]:
        return self.watermarker.detect_batch(images)

    @property
    def scheme_type(self: ReferenceScheme) -> str:
        """Returns the type name of the reference scheme."""
        return "sparse-residual" if self.watermarker.config.sparse_mode else "residual"


class ExternalScheme(WatermarkScheme):
    """Represents a scheme supplied as a pair of plain functions."""

    def __init__(self: ExternalScheme, name: str, embed_fn: EmbedFn, detect_fn: DetectFn, message_length: int) -> None:
        super().__init__(name, message_length)
        self.embed_fn = embed_fn
        self.detect_fn = detect_fn

    def embed(self: ExternalScheme, x: ImageTensor, m: BitMessage) -> ImageTensor:
        if len(m) != self.message_length:
            raise MetricDomainError(f"Scheme {self.name} embeds {self.message_length} bits, got {len(m)}.")

        return self.embed_fn(x, m)

    def detect(self: ExternalScheme, x: ImageTensor) -> tuple[BitMessage, np.ndarray]:
        result = self.detect_fn(x)

        # Schemes without soft outputs get ±1 logits
        if isinstance(result, BitMessage):
            return result, 2.0 * result.bits.astype(np.float64) - 1.0

        bits, logits = result
        return bits, np.asarray(logits, dtype=np.float64)

    @property
    def scheme_type(self: ExternalScheme) -> str:
        """Returns the type name of externally registered schemes."""
        return "external"
