#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING

import torch
from torch import nn

from libdemark.utils.exceptions import ModelShapeError

if TYPE_CHECKING:
    from libdemark.demark.config import AttackModelConfig


class Reconstructor(nn.Module):
    """Mirrors the sparse encoder: nearest upsampling + conv blocks back to a 3-channel image in [0, 1]."""

    def __init__(self: Reconstructor, config: AttackModelConfig) -> None:
        super().__init__()

        self.in_channels = config.channels[-1]

        # Block i undoes encoder block i, visited from the deepest one
        targets = (3, *config.channels[:-1])
        blocks = []

        for index in reversed(range(len(config.channels))):
            layers: list[nn.Module] = []

            if config.strides[index] > 1:
                layers.append(nn.Upsample(scale_factor=config.strides[index], mode="nearest"))

            layers.append(
                nn.Conv2d(
                    config.channels[index],
                    targets[index],
                    kernel_size=config.kernel_size,
                    padding=config.kernel_size // 2,
                )
            )
            layers.append(nn.Sigmoid() if index == 0 else nn.ReLU())

            blocks.append(nn.Sequential(*layers))

        self.blocks = nn.Sequential(*blocks)

    def forward(self: Reconstructor, z: torch.Tensor) -> torch.Tensor:
        if z.dim() != 4 or z.shape[1] != self.in_channels:
            raise ModelShapeError(f"The reconstructor expects an N×{self.in_channels}×h×w latent, got {tuple(z.shape)}.")

        return self.blocks(z)
