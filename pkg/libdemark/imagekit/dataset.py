#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Sequence

from libdemark.imagekit.image_io import READABLE_SUFFIXES, load_image
from libdemark.imagekit.image_tensor import MIN_IMAGE_SIDE, ImageTensor
from libdemark.imagekit.synthetic import synth_image
from libdemark.utils.exceptions import DatasetSpecError, EmptyDatasetError


class DatasetSource(str, Enum):
    """Where the images of a dataset come from."""

    DIRECTORY = "directory"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class DatasetSpec:
    """Describes a deterministic sequence of images."""

    source: DatasetSource
    """Either a directory of PNG/JPEG files or the procedural generator."""

    location: str | int
    """The directory path, or the generator seed."""

    target_size: tuple[int, int] = (64, 64)
    """The (height, width) every image is resized to."""

    count_limit: int | None = None
    """The maximum number of images. Required for synthetic datasets, where it is the dataset size."""

    def __post_init__(self: DatasetSpec) -> None:
        object.__setattr__(self, "source", DatasetSource(self.source))
        object.__setattr__(self, "target_size", tuple(int(v) for v in self.target_size))

        if len(self.target_size) != 2 or min(self.target_size) < MIN_IMAGE_SIDE:
            raise DatasetSpecError(f"Invalid target size {self.target_size}.")

        if self.count_limit is not None and self.count_limit < 1:
            raise DatasetSpecError(f"count_limit must be positive, got {self.count_limit}.")

        match self.source:
            case DatasetSource.DIRECTORY:
                if not isinstance(self.location, str) or not Path(self.location).is_dir():
                    raise DatasetSpecError(f"Dataset directory {self.location} does not exist.")
            case DatasetSource.SYNTHETIC:
                if isinstance(self.location, bool) or not isinstance(self.location, int):
                    raise DatasetSpecError(f"A synthetic dataset needs an integer seed, got {self.location!r}.")
                if self.count_limit is None:
                    raise DatasetSpecError("A synthetic dataset needs a count_limit.")

    def to_dict(self: DatasetSpec) -> dict[str, Any]:
        """Returns the JSON form of the spec."""
        return {
            "source": self.source.value,
            "location": self.location,
            "target_size": list(self.target_size),
            "count_limit": self.count_limit,
        }

    @classmethod
    def from_dict(cls: type[DatasetSpec], payload: dict[str, Any]) -> DatasetSpec:
        """Builds a spec from its JSON form."""
        try:
            return cls(
                source=payload["source"],
                location=payload["location"],
                target_size=tuple(payload.get("target_size", (64, 64))),
                count_limit=payload.get("count_limit"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DatasetSpecError(f"Invalid dataset specification {payload}: {e}") from e


def list_image_files(directory: str | Path) -> list[Path]:
    """Returns the readable image files of a directory in lexicographic order."""
    return sorted(
        (path for path in Path(directory).iterdir() if path.is_file() and path.suffix.lower() in READABLE_SUFFIXES),
        key=lambda path: path.name,
    )


def iterate_dataset(spec: DatasetSpec) -> Iterator[ImageTensor]:
    """Yields the images of a dataset in deterministic order.

    Args:
        spec (DatasetSpec): The dataset.

    Returns:
        Iterator[ImageTensor]: The images, all resized to spec.target_size.
    """
    match spec.source:
        case DatasetSource.DIRECTORY:
            files = list_image_files(spec.location)

            if not files:
                raise EmptyDatasetError(f"Dataset directory {spec.location} contains no PNG or JPEG images.")

            if spec.count_limit is not None:
                files = files[: spec.count_limit]

            return (load_image(path, spec.target_size) for path in files)
        case DatasetSource.SYNTHETIC:
            return (synth_image(spec.location, index, spec.target_size) for index in range(spec.count_limit))


def load_dataset(spec: DatasetSpec) -> list[ImageTensor]:
    """Materializes a dataset."""
    return list(iterate_dataset(spec))


def resolve_images(data: DatasetSpec | Sequence[ImageTensor]) -> list[ImageTensor]:
    """Materializes a dataset spec, or passes already loaded images through."""
    images = load_dataset(data) if isinstance(data, DatasetSpec) else list(data)

    if not images:
        raise EmptyDatasetError("Training needs at least one image.")

    return images
