#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

from libdemark.losses.weights import SWLossWeights
from libdemark.utils.exceptions import ConfigError
from libdemark.utils.hashing import stable_hash

MIN_MESSAGE_LENGTH = 8
NOISE_LAYER_NAMES = ("gaussian-noise", "gaussian-blur", "jpeg")


@dataclass(frozen=True)
class WatermarkerConfig:
    """Configuration of the reference residual watermarking scheme and of its training."""

    message_length: int = 30
    """Number of embedded bits."""

    embed_strength: float = 1.0
    """Scale of the additive residual."""

    channels: int = 64
    """Width of the embedder, detector and discriminator convolutions."""

    epochs: int = 50
    """Number of passes over the training set."""

    learning_rate: float = 1e-3
    """Adam learning rate of every optimizer."""

    batch_size: int = 16
    """Images per optimizer step."""

    seed: int = 0
    """Seed of initialization, messages and batch order."""

    loss_weights: SWLossWeights = field(default_factory=SWLossWeights)
    """Weights of the integrity, extraction, adversarial and sparsity terms."""

    sparse_mode: bool = False
    """Whether the sparsity term is trained on. Plain mode ignores lambda_sparse."""

    noise_layers: tuple[str, ...] = ()
    """Distortions simulated on watermarked images during training, one picked per batch."""

    def __post_init__(self: WatermarkerConfig) -> None:
        object.__setattr__(self, "noise_layers", tuple(self.noise_layers))

        if isinstance(self.loss_weights, dict):
            object.__setattr__(self, "loss_weights", SWLossWeights.from_dict(self.loss_weights))

        if self.message_length < MIN_MESSAGE_LENGTH:
            raise ConfigError(f"The message length must be at least {MIN_MESSAGE_LENGTH}, got {self.message_length}.")

        if not math.isfinite(self.embed_strength) or self.embed_strength <= 0:
            raise ConfigError(f"The embed strength must be positive, got {self.embed_strength}.")

        if self.channels < 1:
            raise ConfigError(f"The channel count must be positive, got {self.channels}.")

        if self.epochs < 1:
            raise ConfigError(f"At least one training epoch is needed, got {self.epochs}.")

        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ConfigError(f"The learning rate must be positive, got {self.learning_rate}.")

        if self.batch_size < 1:
            raise ConfigError(f"The batch size must be positive, got {self.batch_size}.")

        unknown = [name for name in self.noise_layers if name not in NOISE_LAYER_NAMES]
        if unknown:
            raise ConfigError(f"Unknown noise layers {unknown}; available: {list(NOISE_LAYER_NAMES)}.")

    @property
    def effective_weights(self: WatermarkerConfig) -> SWLossWeights:
        """Returns the weights actually trained on: lambda_sparse is zeroed in plain mode."""
        if self.sparse_mode:
            return self.loss_weights

        return replace(self.loss_weights, lambda_sparse=0.0)

    @property
    def config_hash(self: WatermarkerConfig) -> str:
        """Returns the provenance hash of the configuration."""
        return stable_hash(self.to_dict())

    def to_dict(self: WatermarkerConfig) -> dict[str, Any]:
        """Returns the JSON form of the configuration."""
        return {
            "message_length": self.message_length,
            "embed_strength": self.embed_strength,
            "channels": self.channels,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "loss_weights": self.loss_weights.to_dict(),
            "sparse_mode": self.sparse_mode,
            "noise_layers": list(self.noise_layers),
        }

    @classmethod
    def from_dict(cls: type[WatermarkerConfig], payload: dict[str, Any]) -> WatermarkerConfig:
        """Builds a configuration from its JSON form. Missing keys take their defaults."""
        try:
            return cls(**payload)
        except TypeError as e:
            raise ConfigError(f"Invalid watermarker configuration: {e}") from e
