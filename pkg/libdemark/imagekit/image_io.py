#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.utils.exceptions import ImageFormatError, ImageIOError, ImageNotFoundError

READABLE_SUFFIXES = (".png", ".jpg", ".jpeg")


def quantize(img: ImageTensor) -> np.ndarray:
    """Returns the 8-bit H×W×3 form of the image, rounding half up."""
    return np.floor(img.data * 255.0 + 0.5).astype(np.uint8)


def dequantize(pixels: np.ndarray) -> ImageTensor:
    """Returns the image whose pixel p maps to p / 255."""
    return ImageTensor(np.asarray(pixels, dtype=np.float64) / 255.0)


def to_pil(img: ImageTensor) -> Image.Image:
    """Returns the image as an 8-bit RGB PIL image."""
    return Image.fromarray(quantize(img))


def from_pil(pil_image: Image.Image, target_size: tuple[int, int] | None = None) -> ImageTensor:
    """Converts a PIL image, optionally resizing it bilinearly.

    Args:
        pil_image (Image.Image): The source image, any mode.
        target_size (tuple[int, int], optional): The (height, width) to resize to. Defaults to None.

    Returns:
        ImageTensor: The converted image.
    """
    pil_image = pil_image.convert("RGB")

    if target_size is not None:
        height, width = target_size

        if pil_image.size != (width, height):
            pil_image = pil_image.resize((width, height), resample=Image.BILINEAR)

    return dequantize(np.asarray(pil_image))


def load_image(path: str | Path, target_size: tuple[int, int] | None = None) -> ImageTensor:
    """Loads an 8-bit RGB PNG or JPEG, resizing it to the target size when one is given.

    Args:
        path (str | Path): The image file.
        target_size (tuple[int, int], optional): The (height, width) of the result. Defaults to the native size.

    Returns:
        ImageTensor: The loaded image.
    """
    path = Path(path)

    if not path.is_file():
        raise ImageNotFoundError(f"Image {path} does not exist.")

    try:
        with Image.open(path) as pil_image:
            pil_image.load()
            return from_pil(pil_image, target_size)
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise ImageFormatError(f"Image {path} could not be decoded: {e}") from e


def save_image(img: ImageTensor, path: str | Path) -> None:
    """Writes the image as an 8-bit RGB PNG. Element v is stored as round(v * 255).

    Args:
        img (ImageTensor): The image.
        path (str | Path): The destination file. Its parent directory must exist.
    """
    path = Path(path)

    if not path.parent.is_dir():
        raise ImageIOError(f"Directory {path.parent} does not exist.")

    try:
        to_pil(img).save(path, format="PNG")
    except OSError as e:
        raise ImageIOError(f"Image {path} could not be written: {e}") from e


def jpeg_roundtrip(img: ImageTensor, quality: int) -> ImageTensor:
    """Encodes the image as a JPEG of the given quality in memory and decodes it back.

    Args:
        img (ImageTensor): The image.
        quality (int): The JPEG quality in [1, 100].

    Returns:
        ImageTensor: The decoded image, same shape.
    """
    buffer = io.BytesIO()
    to_pil(img).save(buffer, format="JPEG", quality=int(quality))
    buffer.seek(0)

    with Image.open(buffer) as pil_image:
        return from_pil(pil_image)
