#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import numpy as np

from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.utils.exceptions import DatasetSpecError
from libdemark.utils.seeding import derive_seed


def _gradient(rng: np.random.Generator, yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
    angle = rng.uniform(0.0, 2.0 * np.pi)
    start, stop = rng.uniform(0.0, 1.0, size=(2, 3))

    t = np.cos(angle) * xx + np.sin(angle) * yy
    t = (t - t.min()) / max(t.max() - t.min(), 1e-12)

    return start + t[..., None] * (stop - start)


def _paint_blobs(rng: np.random.Generator, canvas: np.ndarray, yy: np.ndarray, xx: np.ndarray) -> None:
    for _ in range(rng.integers(2, 6)):
        cy, cx = rng.uniform(0.0, 1.0, size=2)
        sigma = rng.uniform(0.08, 0.3)
        color = rng.uniform(0.0, 1.0, size=3)
        strength = rng.uniform(0.4, 0.9)

        weight = strength * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
        canvas *= 1.0 - weight[..., None]
        canvas += weight[..., None] * color


def _paint_rectangles(rng: np.random.Generator, canvas: np.ndarray) -> None:
    height, width, _ = canvas.shape

    for _ in range(rng.integers(1, 4)):
        y0, y1 = np.sort(rng.integers(0, height + 1, size=2))
        x0, x1 = np.sort(rng.integers(0, width + 1, size=2))
        color = rng.uniform(0.0, 1.0, size=3)
        alpha = rng.uniform(0.5, 1.0)

        canvas[y0:y1, x0:x1] = (1.0 - alpha) * canvas[y0:y1, x0:x1] + alpha * color


def synth_image(seed: int, index: int, size: tuple[int, int]) -> ImageTensor:
    """Generates the index-th procedural image of the given seed.

    Args:
        seed (int): The dataset seed.
        index (int): The position of the image in the dataset.
        size (tuple[int, int]): The (height, width) of the image.

    Returns:
        ImageTensor: A mixture of a colour gradient, smooth blobs and rectangles.
    """
    height, width = size
    rng = np.random.default_rng(derive_seed(seed, index))

    yy, xx = np.meshgrid(
        (np.arange(height) + 0.5) / height,
        (np.arange(width) + 0.5) / width,
        indexing="ij",
    )

    canvas = _gradient(rng, yy, xx)
    _paint_blobs(rng, canvas, yy, xx)
    _paint_rectangles(rng, canvas)

    # Fine grain so that images are not piecewise smooth
    canvas += rng.normal(0.0, 0.01, size=canvas.shape)

    return ImageTensor(canvas)


def synth_dataset(seed: int, count: int, size: tuple[int, int]) -> list[ImageTensor]:
    """Generates a deterministic sequence of procedural images.

    Args:
        seed (int): The dataset seed. Equal seeds yield bit-identical sequences.
        count (int): The number of images.
        size (tuple[int, int]): The (height, width) of every image.

    Returns:
        list[ImageTensor]: The images.
    """
    if count < 1:
        raise DatasetSpecError(f"A synthetic dataset needs at least one image, got count={count}.")

    return [synth_image(seed, index, size) for index in range(count)]
