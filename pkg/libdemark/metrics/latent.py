#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from libdemark.utils.exceptions import MetricDomainError


@dataclass(frozen=True, eq=False)
class Latent:
    """A latent feature array, stored flat."""

    data: np.ndarray
    """The flattened float64 coefficients."""

    shape: tuple[int, ...]
    """The original layout (e.g. C×H×W), kept for reporting and reconstruction."""

    def __post_init__(self: Latent) -> None:
        data = np.asarray(self.data, dtype=np.float64).reshape(-1)

        if data.size == 0:
            raise MetricDomainError("A latent must hold at least one element.")

        if not np.all(np.isfinite(data)):
            raise MetricDomainError("A latent must only hold finite values.")

        shape = tuple(int(v) for v in self.shape)

        if int(np.prod(shape)) != data.size:
            raise MetricDomainError(f"Latent shape {shape} does not match its {data.size} elements.")

        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "shape", shape)

    @property
    def size(self: Latent) -> int:
        """Returns the number of coefficients N."""
        return self.data.size

    @classmethod
    def from_array(cls: type[Latent], array: np.ndarray | torch.Tensor | Sequence[float]) -> Latent:
        """Builds a latent from an array of any layout."""
        if isinstance(array, torch.Tensor):
            array = array.detach().cpu().to(torch.float64).numpy()

        array = np.asarray(array, dtype=np.float64)
        return cls(array.reshape(-1), array.shape)

    def as_array(self: Latent) -> np.ndarray:
        """Returns the coefficients in their original layout."""
        return self.data.reshape(self.shape)


@dataclass(frozen=True, eq=False)
class BitMessage:
    """A fixed-length binary watermark payload."""

    bits: np.ndarray
    """The message bits, as uint8 values in {0, 1}."""

    def __post_init__(self: BitMessage) -> None:
        bits = np.asarray(self.bits).reshape(-1)

        if bits.size == 0:
            raise MetricDomainError("A message must hold at least one bit.")

        if not np.all((bits == 0) | (bits == 1)):
            raise MetricDomainError("A message must only hold 0 and 1.")

        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self: BitMessage) -> int:
        return self.bits.size

    def __eq__(self: BitMessage, other: object) -> bool:
        if not isinstance(other, BitMessage):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))

    def __hash__(self: BitMessage) -> int:
        return hash(self.bits.tobytes())

    def __str__(self: BitMessage) -> str:
        return "".join(str(int(b)) for b in self.bits)

    @classmethod
    def random(cls: type[BitMessage], length: int, rng: np.random.Generator) -> BitMessage:
        """Draws a message of i.i.d. fair bits."""
        return cls(rng.integers(0, 2, size=length))

    @classmethod
    def from_string(cls: type[BitMessage], text: str) -> BitMessage:
        """Parses a message written as a string of 0 and 1."""
        if not text or any(c not in "01" for c in text):
            raise MetricDomainError(f"{text!r} is not a bit string.")
        return cls(np.array([int(c) for c in text]))

    def complement(self: BitMessage) -> BitMessage:
        """Returns the message with every bit flipped."""
        return BitMessage(1 - self.bits)

    def to_torch(self: BitMessage) -> torch.Tensor:
        """Returns the bits as a float32 tensor of shape (1, L)."""
        return torch.from_numpy(self.bits.astype(np.float32)).unsqueeze(0)
