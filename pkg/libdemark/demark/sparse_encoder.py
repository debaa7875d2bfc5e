#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING

import torch
from torch import nn

from libdemark.demark.channel_attention import ChannelAttention
from libdemark.utils.exceptions import ModelShapeError

if TYPE_CHECKING:
    from libdemark.demark.config import AttackModelConfig


class SparseEncoder(nn.Module):
    """Maps an image batch to the latent representation through four conv → ReLU → attention blocks."""

    def __init__(self: SparseEncoder, config: AttackModelConfig) -> None:
        super().__init__()

        self.downsample_factor = config.downsample_factor
        self.out_channels = config.channels[-1]

        blocks = []
        in_channels = 3

        for out_channels, stride in zip(config.channels, config.strides):
            blocks.append(
                nn.Sequential(
                    nn.Conv2d(
                        in_channels,
                        out_channels,
                        kernel_size=config.kernel_size,
                        stride=stride,
                        padding=config.kernel_size // 2,
                    ),
                    nn.ReLU(),
                    ChannelAttention(out_channels, config.attention_reduction),
                )
            )
            in_channels = out_channels

        self.blocks = nn.Sequential(*blocks)

    def latent_shape(self: SparseEncoder, height: int, width: int) -> tuple[int, int, int]:
        """Returns the C×H×W latent shape for an image of the given size."""
        self.check_dimensions(height, width)
        return (self.out_channels, height // self.downsample_factor, width // self.downsample_factor)

    def check_dimensions(self: SparseEncoder, height: int, width: int) -> None:
        """Raises if the image cannot be downsampled and restored exactly."""
        if height % self.downsample_factor or width % self.downsample_factor:
            raise ModelShapeError(
                f"Image dimensions {height}×{width} are not divisible by the downsampling factor {self.downsample_factor}."
            )

    def forward(self: SparseEncoder, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != 3:
            raise ModelShapeError(f"The encoder expects an N×3×H×W batch, got {tuple(x.shape)}.")

        self.check_dimensions(x.shape[2], x.shape[3])
        return self.blocks(x)
