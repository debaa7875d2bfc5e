#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import torch
import torch.nn.functional as F

from libdemark.utils.exceptions import MetricDomainError

SSIM_WINDOW_SIZE = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def gaussian_window(
    window_size: int = SSIM_WINDOW_SIZE,
    sigma: float = SSIM_SIGMA,
    dtype: torch.dtype = torch.float32,
) -> torch.Tensor:
    """Returns a normalized 2-D Gaussian window of shape (window_size, window_size)."""
    coords = torch.arange(window_size, dtype=torch.float64) - window_size // 2
    gauss = torch.exp(-(coords**2) / (2.0 * sigma**2))
    gauss = gauss / gauss.sum()

    return torch.outer(gauss, gauss).to(dtype)


def ssim_per_image(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Returns the mean SSIM of each image pair over channels and valid 11×11 Gaussian windows.

    Args:
        a (torch.Tensor): A batch of shape N×C×H×W with dynamic range 1.
        b (torch.Tensor): A batch of the same shape.

    Returns:
        torch.Tensor: The N per-pair SSIM values. Differentiable in both arguments.
    """
    if a.shape != b.shape:
        raise MetricDomainError(f"SSIM needs equal shapes, got {tuple(a.shape)} and {tuple(b.shape)}.")

    if a.dim() != 4:
        raise MetricDomainError(f"SSIM expects N×C×H×W batches, got {a.dim()} dimensions.")

    if min(a.shape[-2:]) < SSIM_WINDOW_SIZE:
        raise MetricDomainError(
            f"SSIM needs images of at least {SSIM_WINDOW_SIZE}×{SSIM_WINDOW_SIZE}, got {a.shape[-2]}×{a.shape[-1]}."
        )

    channels = a.shape[1]
    window = gaussian_window(dtype=a.dtype).to(a.device)
    window = window.expand(channels, 1, SSIM_WINDOW_SIZE, SSIM_WINDOW_SIZE).contiguous()

    def blur(t: torch.Tensor) -> torch.Tensor:
        return F.conv2d(t, window, groups=channels)

    mu_a = blur(a)
    mu_b = blur(b)

    mu_a_sq = mu_a.pow(2)
    mu_b_sq = mu_b.pow(2)
    mu_ab = mu_a * mu_b

    sigma_a_sq = blur(a * a) - mu_a_sq
    sigma_b_sq = blur(b * b) - mu_b_sq
    sigma_ab = blur(a * b) - mu_ab

    ssim_map = ((2 * mu_ab + SSIM_C1) * (2 * sigma_ab + SSIM_C2)) / (
        (mu_a_sq + mu_b_sq + SSIM_C1) * (sigma_a_sq + sigma_b_sq + SSIM_C2)
    )

    return ssim_map.flatten(1).mean(dim=1)
