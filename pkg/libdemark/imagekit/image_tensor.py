#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from libdemark.utils.exceptions import ModelShapeError

MIN_IMAGE_SIDE = 8


@dataclass(frozen=True, eq=False)
class ImageTensor:
    """An H×W×3 RGB image with intensities in [0, 1]."""

    data: np.ndarray
    """The float64 pixel array, clamped to [0, 1] on construction."""

    def __post_init__(self: ImageTensor) -> None:
        data = np.asarray(self.data, dtype=np.float64)

        if data.ndim != 3 or data.shape[2] != 3:
            raise ModelShapeError(f"An image must have shape H×W×3, got {data.shape}.")

        if data.shape[0] < MIN_IMAGE_SIDE or data.shape[1] < MIN_IMAGE_SIDE:
            raise ModelShapeError(
                f"An image must be at least {MIN_IMAGE_SIDE}×{MIN_IMAGE_SIDE}, got {data.shape[0]}×{data.shape[1]}."
            )

        data = np.clip(data, 0.0, 1.0)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self: ImageTensor) -> int:
        """Returns the image height in pixels."""
        return self.data.shape[0]

    @property
    def width(self: ImageTensor) -> int:
        """Returns the image width in pixels."""
        return self.data.shape[1]

    @property
    def shape(self: ImageTensor) -> tuple[int, int, int]:
        """Returns the (height, width, 3) shape."""
        return self.data.shape

    def to_torch(self: ImageTensor, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """Returns the image as a 1×3×H×W tensor."""
        return torch.from_numpy(np.ascontiguousarray(self.data.transpose(2, 0, 1))).to(dtype).unsqueeze(0)

    @classmethod
    def from_torch(cls: type[ImageTensor], tensor: torch.Tensor) -> ImageTensor:
        """Builds an image from a 3×H×W or 1×3×H×W tensor."""
        if tensor.dim() == 4:
            if tensor.shape[0] != 1:
                raise ModelShapeError(f"Expected a single image, got a batch of {tensor.shape[0]}.")
            tensor = tensor[0]

        return cls(tensor.detach().cpu().to(torch.float64).numpy().transpose(1, 2, 0))

    def __eq__(self: ImageTensor, other: object) -> bool:
        if not isinstance(other, ImageTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self: ImageTensor) -> int:
        return hash((self.shape, self.data.tobytes()))


def stack_images(images: Sequence[ImageTensor], dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Stacks images of equal shape into an N×3×H×W tensor.

    Args:
        images (Sequence[ImageTensor]): The images.
        dtype (torch.dtype, optional): The tensor dtype. Defaults to torch.float32.

    Returns:
        torch.Tensor: The batch.
    """
    if not images:
        raise ModelShapeError("Cannot stack an empty sequence of images.")

    shapes = {image.shape for image in images}

    if len(shapes) > 1:
        raise ModelShapeError(f"Cannot stack images of different shapes: {sorted(shapes)}.")

    array = np.stack([image.data.transpose(2, 0, 1) for image in images])
    return torch.from_numpy(array).to(dtype)


def unstack_images(batch: torch.Tensor) -> list[ImageTensor]:
    """Splits an N×3×H×W tensor into images."""
    return [ImageTensor.from_torch(item) for item in batch]
