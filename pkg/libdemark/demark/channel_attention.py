#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import torch
from torch import nn

from libdemark.utils.exceptions import ModelShapeError


class ChannelAttention(nn.Module):
    """Reweights channels by a shared FC applied to their global average and max descriptors.

    The attention weight of a channel is sigmoid(fc(avg)) + sigmoid(fc(max)), in (0, 2).
    With a zeroed FC every weight is exactly 1 and the block is the identity.
    """

    def __init__(self: ChannelAttention, channels: int, reduction: int = 8) -> None:
        """Initializes the shared two-layer FC.

        Args:
            channels (int): The number of input channels.
            reduction (int, optional): The bottleneck ratio. Defaults to 8.
        """
        super().__init__()

        hidden = max(1, channels // reduction)

        self.channels = channels
        self.avg_pool = nn.AdaptiveAvgPool2d(1)
        self.max_pool = nn.AdaptiveMaxPool2d(1)
        self.fc = nn.Sequential(
            nn.Linear(channels, hidden),
            nn.ReLU(),
            nn.Linear(hidden, channels),
        )

    def attention_weights(self: ChannelAttention, x: torch.Tensor) -> torch.Tensor:
        """Returns the N×C attention weights of an N×C×H×W feature map."""
        if x.dim() != 4 or x.shape[1] != self.channels:
            raise ModelShapeError(f"Channel attention expects N×{self.channels}×H×W, got {tuple(x.shape)}.")

        n, c = x.shape[:2]

        avg_out = torch.sigmoid(self.fc(self.avg_pool(x).view(n, c)))
        max_out = torch.sigmoid(self.fc(self.max_pool(x).view(n, c)))

        return avg_out + max_out

    def forward(self: ChannelAttention, x: torch.Tensor) -> torch.Tensor:
        w = self.attention_weights(x)
        return x * w.view(*w.shape, 1, 1)
