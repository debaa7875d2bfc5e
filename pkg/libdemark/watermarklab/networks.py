#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import torch
from torch import nn

from libdemark.utils.exceptions import ModelShapeError


def _conv_relu(in_channels: int, out_channels: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(nn.Conv2d(in_channels, out_channels, kernel_size=3, stride=stride, padding=1), nn.ReLU())


class ResidualEmbedder(nn.Module):
    """Fuses image features with the spatially replicated message and predicts an additive residual.

    The final residual convolution is zero-initialized, so a fresh embedder leaves images untouched.
    """

    def __init__(self: ResidualEmbedder, message_length: int, channels: int) -> None:
        super().__init__()

        self.message_length = message_length

        self.features = nn.Sequential(_conv_relu(3, channels), _conv_relu(channels, channels))
        self.fuse = _conv_relu(channels + message_length + 3, channels)
        self.residual_head = nn.Conv2d(channels, 3, kernel_size=1)

        nn.init.zeros_(self.residual_head.weight)
        nn.init.zeros_(self.residual_head.bias)

    def latent(self: ResidualEmbedder, x: torch.Tensor, bits: torch.Tensor) -> torch.Tensor:
        """Returns the fused N×C×H×W latent of images and messages.

        Args:
            x (torch.Tensor): An N×3×H×W batch in [0, 1].
            bits (torch.Tensor): The N×L messages in {0, 1}.

        Returns:
            torch.Tensor: The latent the residual is predicted from.
        """
        if bits.dim() != 2 or bits.shape[1] != self.message_length or bits.shape[0] != x.shape[0]:
            raise ModelShapeError(
                f"Expected {x.shape[0]}×{self.message_length} message bits, got {tuple(bits.shape)}."
            )

        # Bits enter as ±1 planes
        message = (2.0 * bits - 1.0).to(x.dtype)
        message = message.view(*message.shape, 1, 1).expand(-1, -1, x.shape[2], x.shape[3])

        return self.fuse(torch.cat([self.features(x), message, x], dim=1))

    def forward(self: ResidualEmbedder, x: torch.Tensor, bits: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns the latent and the residual."""
        z = self.latent(x, bits)
        return z, self.residual_head(z)


class MessageDetector(nn.Module):
    """Extracts message logits from a (possibly attacked) image."""

    def __init__(self: MessageDetector, message_length: int, channels: int) -> None:
        super().__init__()

        self.body = nn.Sequential(
            _conv_relu(3, channels),
            _conv_relu(channels, channels, stride=2),
            _conv_relu(channels, channels, stride=2),
            nn.Conv2d(channels, message_length, kernel_size=3, padding=1),
            nn.AdaptiveAvgPool2d(1),
        )
        self.linear = nn.Linear(message_length, message_length)

    def forward(self: MessageDetector, x: torch.Tensor) -> torch.Tensor:
        return self.linear(self.body(x).flatten(1))


class Discriminator(nn.Module):
    """Scores the probability that an image carries no watermark."""

    def __init__(self: Discriminator, channels: int) -> None:
        super().__init__()

        hidden = max(1, channels // 2)

        self.body = nn.Sequential(
            nn.Conv2d(3, hidden, kernel_size=3, stride=2, padding=1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(hidden, channels, kernel_size=3, stride=2, padding=1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(channels, channels, kernel_size=3, stride=2, padding=1),
            nn.LeakyReLU(0.2),
            nn.AdaptiveAvgPool2d(1),
        )
        self.linear = nn.Linear(channels, 1)

    def forward(self: Discriminator, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.linear(self.body(x).flatten(1))).squeeze(1)
