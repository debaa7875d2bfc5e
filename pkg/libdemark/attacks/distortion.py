#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from scipy import ndimage

from libdemark.imagekit.image_io import jpeg_roundtrip
from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.utils.exceptions import MetricDomainError


class DistortionKind(str, Enum):
    """The baseline image distortions."""

    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    GAUSSIAN_BLUR = "gaussian-blur"
    GAUSSIAN_NOISE = "gaussian-noise"
    JPEG = "jpeg"


@dataclass(frozen=True)
class DistortionSpec:
    """A distortion and its strength."""

    kind: DistortionKind
    """The distortion."""

    strength: float
    """Factor for brightness and contrast, sigma in pixels for blur, sigma in intensity for noise, quality for jpeg."""

    seed: int = 0
    """Seed of the noise distortion."""

    def __post_init__(self: DistortionSpec) -> None:
        try:
            object.__setattr__(self, "kind", DistortionKind(self.kind))
        except ValueError as e:
            raise MetricDomainError(f"Unknown distortion {self.kind!r}.") from e

        if not math.isfinite(self.strength):
            raise MetricDomainError(f"The {self.kind.value} strength must be finite, got {self.strength}.")

        match self.kind:
            case DistortionKind.JPEG:
                if self.strength != int(self.strength) or not 1 <= self.strength <= 100:
                    raise MetricDomainError(f"JPEG quality must be an integer in [1, 100], got {self.strength}.")
            case _:
                if self.strength < 0:
                    raise MetricDomainError(f"The {self.kind.value} strength must be non-negative, got {self.strength}.")

    @property
    def name(self: DistortionSpec) -> str:
        """Returns the registry name of the distortion."""
        return self.kind.value

    def to_dict(self: DistortionSpec) -> dict[str, Any]:
        """Returns the JSON form of the spec."""
        return {"kind": self.kind.value, "strength": self.strength, "seed": self.seed}


def _brightness(x: np.ndarray, factor: float) -> np.ndarray:
    return np.clip(factor * x, 0.0, 1.0)


def _contrast(x: np.ndarray, factor: float) -> np.ndarray:
    # Pivot on the image mean so constant images are unaffected
    mean = x.mean()
    return np.clip(mean + factor * (x - mean), 0.0, 1.0)


def _gaussian_blur(x: np.ndarray, sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    return np.clip(ndimage.gaussian_filter(x, sigma=(sigma, sigma, 0.0), truncate=radius / sigma, mode="reflect"), 0.0, 1.0)


def _gaussian_noise(x: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.clip(x + rng.normal(0.0, sigma, size=x.shape), 0.0, 1.0)


def distort(x: ImageTensor, spec: DistortionSpec) -> ImageTensor:
    """Applies a baseline distortion.

    Brightness and contrast at factor 1, and blur and noise at sigma 0, return the input itself.

    Args:
        x (ImageTensor): The image.
        spec (DistortionSpec): The distortion.

    Returns:
        ImageTensor: The distorted image, same shape.
    """
    strength = spec.strength

    match spec.kind:
        case DistortionKind.BRIGHTNESS:
            return x if strength == 1.0 else ImageTensor(_brightness(x.data, strength))
        case DistortionKind.CONTRAST:
            return x if strength == 1.0 else ImageTensor(_contrast(x.data, strength))
        case DistortionKind.GAUSSIAN_BLUR:
            return x if strength == 0.0 else ImageTensor(_gaussian_blur(x.data, strength))
        case DistortionKind.GAUSSIAN_NOISE:
            return x if strength == 0.0 else ImageTensor(_gaussian_noise(x.data, strength, spec.seed))
        case DistortionKind.JPEG:
            return jpeg_roundtrip(x, int(strength))
