#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

from libdemark.utils.exceptions import ConfigError


@dataclass(frozen=True)
class LossWeights:
    """Weights of the attack training objective alpha * L_SEL + beta * L_SPL."""

    alpha: float = 10.0
    """The sparsity weight."""

    beta: float = 0.1
    """The structural-perceptual weight."""

    def __post_init__(self: LossWeights) -> None:
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"Loss weight {name} must be finite and non-negative, got {value}.")

    def to_dict(self: LossWeights) -> dict[str, float]:
        """Returns the JSON form of the weights."""
        return asdict(self)

    @classmethod
    def from_dict(cls: type[LossWeights], payload: dict[str, Any]) -> LossWeights:
        """Builds the weights from their JSON form."""
        return cls(**payload)


@dataclass(frozen=True)
class SWLossWeights:
    """Weights of the watermarker objective, including the sparse-watermarking term."""

    lambda_integrity: float = 1.0
    """Weight of the pixel MSE between cover and watermarked image."""

    lambda_extraction: float = 3.0
    """Weight of the bitwise BCE of the detector logits."""

    lambda_gan: float = 0.001
    """Weight of the generator adversarial loss."""

    lambda_sparse: float = 10.0
    """Weight of the L1 penalty on the embedder latent. Only applied in sparse mode."""

    def __post_init__(self: SWLossWeights) -> None:
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"Loss weight {name} must be finite and non-negative, got {value}.")

    def to_dict(self: SWLossWeights) -> dict[str, float]:
        """Returns the JSON form of the weights."""
        return asdict(self)

    @classmethod
    def from_dict(cls: type[SWLossWeights], payload: dict[str, Any]) -> SWLossWeights:
        """Builds the weights from their JSON form."""
        return cls(**payload)
