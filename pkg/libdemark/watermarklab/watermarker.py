#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from libdemark.imagekit.image_tensor import ImageTensor, stack_images
from libdemark.metrics.latent import BitMessage, Latent
from libdemark.utils.checkpoint import Checkpoint, load_checkpoint, module_tensors, restore_module, save_checkpoint
from libdemark.utils.exceptions import MetricDomainError
from libdemark.watermarklab.config import WatermarkerConfig
from libdemark.watermarklab.networks import Discriminator, MessageDetector, ResidualEmbedder

WATERMARKER_KIND = "watermarker"


class Watermarker(nn.Module):
    """The reference post-processing watermarking scheme: residual embedder, detector and discriminator.

    Attributes:
        config (WatermarkerConfig): The configuration the scheme was built from.
        embedder (ResidualEmbedder): Maps (image, message) to an additive residual.
        detector (MessageDetector): Maps an image to message logits.
        discriminator (Discriminator): The adversary of the embedder during training.
        training_log (list[float]): The mean training loss of every completed epoch.
    """

    def __init__(self: Watermarker, config: WatermarkerConfig) -> None:
        super().__init__()

        self.config = config

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            self.embedder = ResidualEmbedder(config.message_length, config.channels)
            self.detector = MessageDetector(config.message_length, config.channels)
            self.discriminator = Discriminator(config.channels)

        self.training_log: list[float] = []
        self.eval()

    @property
    def message_length(self: Watermarker) -> int:
        """Returns the number of embedded bits."""
        return self.config.message_length

    def _check_message(self: Watermarker, m: BitMessage) -> None:
        if len(m) != self.message_length:
            raise MetricDomainError(f"Expected a {self.message_length}-bit message, got {len(m)} bits.")

    def watermark_tensor(self: Watermarker, x: torch.Tensor, bits: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns the latent and the watermarked batch, differentiable for training.

        Args:
            x (torch.Tensor): An N×3×H×W batch in [0, 1].
            bits (torch.Tensor): The N×L messages.

        Returns:
            tuple[torch.Tensor, torch.Tensor]: (latent, watermarked batch).
        """
        z, residual = self.embedder(x, bits)
        return z, (x + self.config.embed_strength * residual).clamp(0.0, 1.0)

    def embed_batch(self: Watermarker, images: Sequence[ImageTensor], messages: Sequence[BitMessage]) -> list[ImageTensor]:
        """Watermarks images of equal shape, each with its own message.

        The residual is added in float64, so an all-zero residual returns the inputs exactly.
        """
        if len(images) != len(messages):
            raise MetricDomainError(f"Got {len(images)} images but {len(messages)} messages.")

        for m in messages:
            self._check_message(m)

        bits = torch.cat([m.to_torch() for m in messages])

        with torch.no_grad():
            _, residual = self.embedder(stack_images(images), bits)

        residual = residual.to(torch.float64).numpy().transpose(0, 2, 3, 1)

        return [
            ImageTensor(np.clip(image.data + self.config.embed_strength * r, 0.0, 1.0))
            for image, r in zip(images, residual)
        ]

    def embed(self: Watermarker, x: ImageTensor, m: BitMessage) -> ImageTensor:
        """Returns x with the message m embedded.

        Args:
            x (ImageTensor): The cover image.
            m (BitMessage): The message, config.message_length bits long.

        Returns:
            ImageTensor: clamp(x + strength * residual(x, m)).
        """
        return self.embed_batch([x], [m])[0]

    def detect_logits(self: Watermarker, images: Sequence[ImageTensor]) -> np.ndarray:
        """Returns the N×L detector logits of images of equal shape."""
        with torch.no_grad():
            return self.detector(stack_images(images)).to(torch.float64).numpy()

    def detect_batch(self: Watermarker, images: Sequence[ImageTensor]) -> list[tuple[BitMessage, np.ndarray]]:
        """Detects the messages of images of equal shape."""
        return [(BitMessage((logits > 0).astype(np.uint8)), logits) for logits in self.detect_logits(images)]

    def detect(self: Watermarker, x: ImageTensor) -> tuple[BitMessage, np.ndarray]:
        """Extracts the message of an image.

        Args:
            x (ImageTensor): The (possibly attacked) image.

        Returns:
            tuple[BitMessage, np.ndarray]: The bits (logit > 0) and the L logits.
        """
        return self.detect_batch([x])[0]

    def probe_latent(self: Watermarker, x: ImageTensor, m: BitMessage) -> Latent:
        """Returns the embedder's fused latent of (x, m). Only meant for white-box dispersal studies."""
        self._check_message(m)

        with torch.no_grad():
            z = self.embedder.latent(x.to_torch(), m.to_torch())

        return Latent.from_array(z[0])

    def to_checkpoint(self: Watermarker) -> Checkpoint:
        """Returns the scheme as a checkpoint."""
        return Checkpoint(
            kind=WATERMARKER_KIND,
            config=self.config.to_dict(),
            seed=self.config.seed,
            epochs=len(self.training_log),
            loss_trace=list(self.training_log),
            tensors={
                **module_tensors("embedder", self.embedder),
                **module_tensors("detector", self.detector),
                **module_tensors("discriminator", self.discriminator),
            },
        )

    def save(self: Watermarker, path: str | Path) -> None:
        """Writes the scheme to a checkpoint file."""
        save_checkpoint(self.to_checkpoint(), path)

    @classmethod
    def load(cls: type[Watermarker], path: str | Path) -> Watermarker:
        """Reads a scheme from a checkpoint file."""
        checkpoint = load_checkpoint(path, expected_kind=WATERMARKER_KIND)

        watermarker = cls(WatermarkerConfig.from_dict(checkpoint.config))
        restore_module("embedder", watermarker.embedder, checkpoint.tensors)
        restore_module("detector", watermarker.detector, checkpoint.tensors)
        restore_module("discriminator", watermarker.discriminator, checkpoint.tensors)
        watermarker.training_log = list(checkpoint.loss_trace)
        watermarker.eval()

        return watermarker
