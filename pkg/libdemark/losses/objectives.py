#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import torch
import torch.nn.functional as F

from libdemark.losses.weights import LossWeights, SWLossWeights
from libdemark.metrics.structural_similarity import ssim_per_image
from libdemark.utils.exceptions import MetricDomainError

if TYPE_CHECKING:
    from libdemark.losses.feature_embedder import FeatureEmbedder

GAN_EPSILON = 1e-7


class SPLVariant(str, Enum):
    """Which terms of the structural-perceptual loss are active."""

    FULL = "full"
    SSIM_ONLY = "ssim-only"
    LPIPS_ONLY = "lpips-only"


def _check_same_shape(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise MetricDomainError(f"Expected equal shapes, got {tuple(a.shape)} and {tuple(b.shape)}.")


def l_sel(Z: torch.Tensor) -> torch.Tensor:
    """Returns the sparse encoding loss: the mean absolute value of the latent.

    The L1 norm is divided by the number of elements so that alpha transfers across
    latent sizes and batch shapes.
    """
    if Z.numel() == 0:
        raise MetricDomainError("The sparse encoding loss needs a non-empty latent.")

    return Z.abs().mean()


def l_ssim(x: torch.Tensor, x_tilde: torch.Tensor) -> torch.Tensor:
    """Returns 1 - SSIM, averaged over the batch. Uses the same windowed SSIM as the metric."""
    _check_same_shape(x, x_tilde)
    return 1.0 - ssim_per_image(x, x_tilde).mean()


def l_lpips(x: torch.Tensor, x_tilde: torch.Tensor, embedder: FeatureEmbedder) -> torch.Tensor:
    """Returns the perceptual distance of the embedder, averaged over the batch."""
    _check_same_shape(x, x_tilde)
    return embedder.distance(x, x_tilde).mean()


def l_spl(
    x: torch.Tensor,
    x_tilde: torch.Tensor,
    embedder: FeatureEmbedder,
    variant: SPLVariant = SPLVariant.FULL,
) -> torch.Tensor:
    """Returns the structural-perceptual loss L_SSIM + L_LPIPS.

    Args:
        x (torch.Tensor): The reference batch.
        x_tilde (torch.Tensor): The reconstructed batch.
        embedder (FeatureEmbedder): The fixed feature extractor of the perceptual term.
        variant (SPLVariant, optional): Drops one of the two terms for ablations. Defaults to SPLVariant.FULL.

    Returns:
        torch.Tensor: The scalar loss.
    """
    match SPLVariant(variant):
        case SPLVariant.FULL:
            return l_ssim(x, x_tilde) + l_lpips(x, x_tilde, embedder)
        case SPLVariant.SSIM_ONLY:
            return l_ssim(x, x_tilde)
        case SPLVariant.LPIPS_ONLY:
            return l_lpips(x, x_tilde, embedder)


def total_loss(sel_value: torch.Tensor | float, spl_value: torch.Tensor | float, w: LossWeights) -> torch.Tensor | float:
    """Returns alpha * L_SEL + beta * L_SPL."""
    return w.alpha * sel_value + w.beta * spl_value


def bce_message_loss(logits: torch.Tensor, bits: torch.Tensor) -> torch.Tensor:
    """Returns the mean binary cross-entropy of sigmoid(logits) against the message bits.

    Args:
        logits (torch.Tensor): Detector logits, shape (L,) or (N, L).
        bits (torch.Tensor): The bits in {0, 1}, same shape.

    Returns:
        torch.Tensor: The scalar loss.
    """
    if logits.shape != bits.shape:
        raise MetricDomainError(f"Logits {tuple(logits.shape)} and bits {tuple(bits.shape)} differ in shape.")

    return F.binary_cross_entropy_with_logits(logits, bits.to(logits.dtype))


def perceptual_integrity_loss(x: torch.Tensor, x_m: torch.Tensor) -> torch.Tensor:
    """Returns the mean squared pixel difference between cover and watermarked images."""
    _check_same_shape(x, x_m)
    return F.mse_loss(x_m, x)


def gan_pair_losses(score_real: torch.Tensor, score_fake: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Returns the discriminator and generator losses of the standard adversarial objective.

    Args:
        score_real (torch.Tensor): Discriminator probabilities on cover images.
        score_fake (torch.Tensor): Discriminator probabilities on watermarked images.

    Returns:
        tuple[torch.Tensor, torch.Tensor]: (discriminator loss, generator loss).
    """
    score_real = score_real.clamp(GAN_EPSILON, 1.0 - GAN_EPSILON)
    score_fake = score_fake.clamp(GAN_EPSILON, 1.0 - GAN_EPSILON)

    discriminator_loss = -torch.log(score_real).mean() - torch.log(1.0 - score_fake).mean()
    generator_loss = -torch.log(score_fake).mean()

    return discriminator_loss, generator_loss


@dataclass(frozen=True)
class SWLossComponents:
    """The four terms of the watermarker objective."""

    integrity: torch.Tensor | float
    """Pixel MSE between cover and watermarked image."""

    extraction: torch.Tensor | float
    """BCE of the detector logits."""

    gan: torch.Tensor | float
    """Generator adversarial loss."""

    sparse: torch.Tensor | float
    """Sparse encoding loss of the embedder latent."""


def sw_total_loss(components: SWLossComponents, w: SWLossWeights) -> torch.Tensor | float:
    """Returns the weighted sum of the four watermarker loss terms."""
    return (
        w.lambda_integrity * components.integrity
        + w.lambda_extraction * components.extraction
        + w.lambda_gan * components.gan
        + w.lambda_sparse * components.sparse
    )
