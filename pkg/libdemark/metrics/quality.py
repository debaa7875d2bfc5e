#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

import numpy as np
import torch
from scipy import linalg

from libdemark.imagekit.image_tensor import ImageTensor, stack_images
from libdemark.metrics.structural_similarity import ssim_per_image
from libdemark.utils.exceptions import MetricDomainError

if TYPE_CHECKING:
    from libdemark.losses.feature_embedder import FeatureEmbedder

PSNR_CAP_DB = 99.0


def _check_same_shape(a: ImageTensor, b: ImageTensor) -> None:
    if a.shape != b.shape:
        raise MetricDomainError(f"Images must have equal shapes, got {a.shape} and {b.shape}.")


def psnr(a: ImageTensor, b: ImageTensor) -> float:
    """Returns the peak signal-to-noise ratio in dB for dynamic range 1, capped at 99 dB.

    Args:
        a (ImageTensor): The first image.
        b (ImageTensor): The second image.

    Returns:
        float: 10 * log10(1 / MSE), or 99 for identical images.
    """
    _check_same_shape(a, b)

    mse = float(np.mean((a.data - b.data) ** 2))

    if mse == 0.0:
        return PSNR_CAP_DB

    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def ssim_index(a: ImageTensor, b: ImageTensor) -> float:
    """Returns the SSIM index, averaged over channels and 11×11 Gaussian windows.

    Args:
        a (ImageTensor): The first image, at least 11×11.
        b (ImageTensor): The second image.

    Returns:
        float: A value in [-1, 1], equal to 1 only for identical images.
    """
    _check_same_shape(a, b)

    with torch.no_grad():
        return float(ssim_per_image(a.to_torch(torch.float64), b.to_torch(torch.float64))[0])


def perceptual_distance(a: ImageTensor, b: ImageTensor, embedder: FeatureEmbedder) -> float:
    """Returns the layer-normalized squared feature distance of the embedder's tapped layers.

    Args:
        a (ImageTensor): The first image.
        b (ImageTensor): The second image.
        embedder (FeatureEmbedder): The fixed feature extractor.

    Returns:
        float: A non-negative distance.
    """
    _check_same_shape(a, b)

    with torch.no_grad():
        return float(embedder.distance(a.to_torch(embedder.dtype), b.to_torch(embedder.dtype))[0])


def frechet_distance(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Returns the Fréchet distance of the Gaussians fitted to two feature matrices.

    Args:
        features_a (np.ndarray): An (N, D) feature matrix.
        features_b (np.ndarray): An (M, D) feature matrix.

    Returns:
        float: ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), clipped at 0.
    """
    features_a = np.asarray(features_a, dtype=np.float64)
    features_b = np.asarray(features_b, dtype=np.float64)

    if features_a.ndim == 1:
        features_a = features_a[:, None]
    if features_b.ndim == 1:
        features_b = features_b[:, None]

    dimension = features_a.shape[1]

    if features_b.shape[1] != dimension:
        raise MetricDomainError(f"Feature dimensions differ: {dimension} and {features_b.shape[1]}.")

    for features in (features_a, features_b):
        if features.shape[0] < dimension + 1:
            raise MetricDomainError(
                f"A covariance of {dimension} features needs at least {dimension + 1} samples, got {features.shape[0]}."
            )

    mu_a = features_a.mean(axis=0)
    mu_b = features_b.mean(axis=0)
    sigma_a = np.atleast_2d(np.cov(features_a, rowvar=False))
    sigma_b = np.atleast_2d(np.cov(features_b, rowvar=False))

    diff = mu_a - mu_b

    if np.array_equal(sigma_a, sigma_b):
        # (S S)^(1/2) = S for a covariance, sqrtm loses digits on near-singular S
        distance = diff @ diff
        return float(max(distance, 0.0))

    covmean = linalg.sqrtm(sigma_a @ sigma_b)

    # sqrtm may return tiny imaginary parts from numerical error
    if np.iscomplexobj(covmean):
        covmean = covmean.real

    if not np.all(np.isfinite(covmean)):
        # Singular product, retry with a small diagonal offset
        offset = np.eye(dimension) * 1e-10
        covmean = linalg.sqrtm((sigma_a + offset) @ (sigma_b + offset)).real

    distance = diff @ diff + np.trace(sigma_a) + np.trace(sigma_b) - 2.0 * np.trace(covmean)

    return float(max(distance, 0.0))


def frechet_feature_distance(
    set_a: Sequence[ImageTensor],
    set_b: Sequence[ImageTensor],
    embedder: FeatureEmbedder,
) -> float:
    """Returns the Fréchet distance between the pooled embedder features of two image sets.

    Args:
        set_a (Sequence[ImageTensor]): The first image set.
        set_b (Sequence[ImageTensor]): The second image set.
        embedder (FeatureEmbedder): The fixed feature extractor.

    Returns:
        float: A non-negative distance. Only comparable across runs sharing the embedder.
    """
    with torch.no_grad():
        features_a = embedder.pooled_features(stack_images(set_a, embedder.dtype)).cpu().numpy()
        features_b = embedder.pooled_features(stack_images(set_b, embedder.dtype)).cpu().numpy()

    return frechet_distance(features_a, features_b)
