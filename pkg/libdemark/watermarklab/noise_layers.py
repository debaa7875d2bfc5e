#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import torch
import torch.nn.functional as F

from libdemark.imagekit.image_io import jpeg_roundtrip
from libdemark.imagekit.image_tensor import stack_images, unstack_images
from libdemark.metrics.structural_similarity import gaussian_window
from libdemark.utils.exceptions import ConfigError

NOISE_SIGMA = 0.03
BLUR_SIGMA = 1.0
BLUR_WINDOW = 5
JPEG_QUALITY = 50


def gaussian_noise_layer(x: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """Adds seeded Gaussian noise."""
    noise = torch.randn(x.shape, generator=generator, dtype=x.dtype)
    return (x + NOISE_SIGMA * noise.to(x.device)).clamp(0.0, 1.0)


def gaussian_blur_layer(x: torch.Tensor) -> torch.Tensor:
    """Blurs every channel with a small Gaussian kernel, replicating borders."""
    channels = x.shape[1]
    window = gaussian_window(BLUR_WINDOW, BLUR_SIGMA, dtype=x.dtype).to(x.device)
    window = window.expand(channels, 1, BLUR_WINDOW, BLUR_WINDOW).contiguous()

    padded = F.pad(x, [BLUR_WINDOW // 2] * 4, mode="replicate")
    return F.conv2d(padded, window, groups=channels)


def jpeg_layer(x: torch.Tensor) -> torch.Tensor:
    """Applies a real JPEG round-trip in the forward pass and passes gradients straight through."""
    with torch.no_grad():
        compressed = stack_images(
            [jpeg_roundtrip(image, JPEG_QUALITY) for image in unstack_images(x.clamp(0.0, 1.0))],
            dtype=x.dtype,
        ).to(x.device)

    return x + (compressed - x).detach()


def apply_noise_layer(name: str, x: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """Applies the named training distortion to a batch.

    Args:
        name (str): One of "gaussian-noise", "gaussian-blur" or "jpeg".
        x (torch.Tensor): The watermarked N×3×H×W batch.
        generator (torch.Generator): The source of noise.

    Returns:
        torch.Tensor: The distorted batch, differentiable in x.
    """
    match name:
        case "gaussian-noise":
            return gaussian_noise_layer(x, generator)
        case "gaussian-blur":
            return gaussian_blur_layer(x)
        case "jpeg":
            return jpeg_layer(x)
        case _:
            raise ConfigError(f"Unknown noise layer {name!r}.")
