#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import Any


class ImageNotFoundError(FileNotFoundError):
    """Raised when an image file does not exist."""


class ImageFormatError(ValueError):
    """Raised when an image file cannot be decoded."""


class ImageIOError(OSError):
    """Raised when an image cannot be written."""


class DatasetSpecError(ValueError):
    """Raised when a dataset specification is invalid."""


class EmptyDatasetError(ValueError):
    """Raised when a dataset yields no images."""


class MetricDomainError(ValueError):
    """Raised when a metric or a loss is evaluated outside of its domain."""


class DegenerateSupportError(MetricDomainError):
    """Raised when a latent has no element above the significance threshold."""


class UnachievableThresholdError(MetricDomainError):
    """Raised when no detection threshold can meet the requested false positive rate."""


class ModelShapeError(ValueError):
    """Raised when an input does not fit the shape expected by a model."""


class TrainingFailureError(RuntimeError):
    """Raised when training cannot start or diverges."""


class RegistryError(KeyError):
    """Raised on unknown or duplicate names in a registry."""

    def __str__(self: RegistryError) -> str:
        # KeyError quotes its argument, keep the message readable
        return str(self.args[0]) if self.args else ""


class ConfigError(ValueError):
    """Raised when an experiment configuration is missing or invalid."""


class CheckpointError(ConfigError):
    """Raised when a checkpoint container is corrupt or does not match its configuration."""


class BudgetExceededError(RuntimeError):
    """Raised when a wall-clock budget runs out. Carries whatever was completed."""

    def __init__(self: BudgetExceededError, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial
