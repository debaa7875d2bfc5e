#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from libdemark.losses.objectives import SPLVariant
from libdemark.losses.weights import LossWeights
from libdemark.utils.exceptions import ConfigError
from libdemark.utils.hashing import stable_hash

ATTACK_MODEL_BLOCKS = 4


@dataclass(frozen=True)
class AttackModelConfig:
    """Configuration of the sparse encoder / reconstructor pair and of its training."""

    channels: tuple[int, ...] = (32, 64, 128, 128)
    """Output channels of the four encoder blocks."""

    kernel_size: int = 3
    """Odd convolution kernel size."""

    strides: tuple[int, ...] = (2, 2, 1, 1)
    """Stride of every encoder block, each 1 or 2."""

    attention_reduction: int = 8
    """Bottleneck ratio of the channel-attention FC."""

    weights: LossWeights = field(default_factory=LossWeights)
    """Weights of the sparse encoding and structural-perceptual losses."""

    epochs: int = 50
    """Number of passes over the training set."""

    learning_rate: float = 1e-3
    """Adam learning rate."""

    batch_size: int = 16
    """Images per optimizer step."""

    seed: int = 0
    """Seed of initialization and batch order."""

    spl_variant: SPLVariant = SPLVariant.FULL
    """Which structural-perceptual terms are trained on."""

    embedder_seed: int = 0
    """Seed of the fixed feature embedder of the perceptual term."""

    def __post_init__(self: AttackModelConfig) -> None:
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        object.__setattr__(self, "strides", tuple(int(s) for s in self.strides))

        try:
            object.__setattr__(self, "spl_variant", SPLVariant(self.spl_variant))
        except ValueError as e:
            raise ConfigError(f"Unknown structural-perceptual variant {self.spl_variant!r}.") from e

        if isinstance(self.weights, dict):
            object.__setattr__(self, "weights", LossWeights.from_dict(self.weights))

        if len(self.channels) != ATTACK_MODEL_BLOCKS or len(self.strides) != ATTACK_MODEL_BLOCKS:
            raise ConfigError(f"The attack model has exactly {ATTACK_MODEL_BLOCKS} blocks.")

        if min(self.channels) < 1:
            raise ConfigError(f"Channel counts must be positive, got {self.channels}.")

        if any(s not in (1, 2) for s in self.strides):
            raise ConfigError(f"Block strides must be 1 or 2, got {self.strides}.")

        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"The kernel size must be a positive odd integer, got {self.kernel_size}.")

        if self.attention_reduction < 1:
            raise ConfigError(f"The attention reduction must be positive, got {self.attention_reduction}.")

        if self.epochs < 1:
            raise ConfigError(f"At least one training epoch is needed, got {self.epochs}.")

        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ConfigError(f"The learning rate must be positive, got {self.learning_rate}.")

        if self.batch_size < 1:
            raise ConfigError(f"The batch size must be positive, got {self.batch_size}.")

    @property
    def downsample_factor(self: AttackModelConfig) -> int:
        """Returns the total spatial downsampling of the encoder."""
        return math.prod(self.strides)

    @property
    def config_hash(self: AttackModelConfig) -> str:
        """Returns the provenance hash of the configuration."""
        return stable_hash(self.to_dict())

    def to_dict(self: AttackModelConfig) -> dict[str, Any]:
        """Returns the JSON form of the configuration."""
        return {
            "channels": list(self.channels),
            "kernel_size": self.kernel_size,
            "strides": list(self.strides),
            "attention_reduction": self.attention_reduction,
            "weights": self.weights.to_dict(),
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "spl_variant": self.spl_variant.value,
            "embedder_seed": self.embedder_seed,
        }

    @classmethod
    def from_dict(cls: type[AttackModelConfig], payload: dict[str, Any]) -> AttackModelConfig:
        """Builds a configuration from its JSON form. Missing keys take their defaults."""
        try:
            return cls(**payload)
        except TypeError as e:
            raise ConfigError(f"Invalid attack model configuration: {e}") from e
