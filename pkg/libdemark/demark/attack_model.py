#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from libdemark.demark.config import AttackModelConfig
from libdemark.demark.reconstructor import Reconstructor
from libdemark.demark.sparse_encoder import SparseEncoder
from libdemark.imagekit.image_tensor import ImageTensor, stack_images, unstack_images
from libdemark.metrics.latent import Latent
from libdemark.utils.checkpoint import Checkpoint, load_checkpoint, module_tensors, restore_module, save_checkpoint
from libdemark.utils.exceptions import ModelShapeError

ATTACK_MODEL_KIND = "attack_model"


class AttackModel(nn.Module):
    """The learned sparse encoder and its mirrored reconstructor.

    Attributes:
        config (AttackModelConfig): The configuration the model was built from.
        encoder (SparseEncoder): The sparse encoder.
        reconstructor (Reconstructor): The reconstructor.
        training_log (list[float]): The mean training loss of every completed epoch.
    """

    def __init__(self: AttackModel, config: AttackModelConfig) -> None:
        super().__init__()

        self.config = config

        # Initialization is part of the seeded contract
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            self.encoder = SparseEncoder(config)
            self.reconstructor = Reconstructor(config)

        self.training_log: list[float] = []
        self.eval()

    @property
    def parameter_bytes(self: AttackModel) -> int:
        """Returns the memory held by the model parameters, in bytes."""
        return sum(p.numel() * p.element_size() for p in self.parameters())

    def forward(self: AttackModel, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns the latent and the reconstruction of an N×3×H×W batch."""
        z = self.encoder(x)
        return z, self.reconstructor(z)

    def encode(self: AttackModel, x: ImageTensor) -> Latent:
        """Returns the C×H/f×W/f latent of a single image, f being the downsampling factor."""
        with torch.no_grad():
            z = self.encoder(x.to_torch())

        return Latent.from_array(z[0])

    def encode_batch(self: AttackModel, images: Sequence[ImageTensor]) -> list[Latent]:
        """Encodes images of equal shape in one forward pass."""
        with torch.no_grad():
            z = self.encoder(stack_images(images))

        return [Latent.from_array(item) for item in z]

    def reconstruct(self: AttackModel, Z: Latent) -> ImageTensor:
        """Maps a latent produced by encode back to an image."""
        if len(Z.shape) != 3 or Z.shape[0] != self.encoder.out_channels:
            raise ModelShapeError(f"Expected a {self.encoder.out_channels}×h×w latent, got shape {Z.shape}.")

        z = torch.from_numpy(Z.as_array().copy()).to(torch.float32).unsqueeze(0)

        with torch.no_grad():
            return ImageTensor.from_torch(self.reconstructor(z))

    def attack(self: AttackModel, x_m: ImageTensor) -> ImageTensor:
        """Removes the watermark of an image by passing it through the sparse bottleneck.

        Args:
            x_m (ImageTensor): The (possibly watermarked) image.

        Returns:
            ImageTensor: The reconstruction, same shape, values in [0, 1].
        """
        return self.reconstruct(self.encode(x_m))

    def attack_batch(self: AttackModel, images: Sequence[ImageTensor]) -> list[ImageTensor]:
        """Attacks images of equal shape in one forward pass."""
        with torch.no_grad():
            _, x_tilde = self(stack_images(images))

        return unstack_images(x_tilde)

    def to_checkpoint(self: AttackModel) -> Checkpoint:
        """Returns the model as a checkpoint."""
        return Checkpoint(
            kind=ATTACK_MODEL_KIND,
            config=self.config.to_dict(),
            seed=self.config.seed,
            epochs=len(self.training_log),
            loss_trace=list(self.training_log),
            tensors={**module_tensors("encoder", self.encoder), **module_tensors("reconstructor", self.reconstructor)},
        )

    def save(self: AttackModel, path: str | Path) -> None:
        """Writes the model to a checkpoint file."""
        save_checkpoint(self.to_checkpoint(), path)

    @classmethod
    def load(cls: type[AttackModel], path: str | Path) -> AttackModel:
        """Reads a model from a checkpoint file.

        Args:
            path (str | Path): The checkpoint file.

        Returns:
            AttackModel: The restored model, in evaluation mode.
        """
        checkpoint = load_checkpoint(path, expected_kind=ATTACK_MODEL_KIND)

        model = cls(AttackModelConfig.from_dict(checkpoint.config))
        restore_module("encoder", model.encoder, checkpoint.tensors)
        restore_module("reconstructor", model.reconstructor, checkpoint.tensors)
        model.training_log = list(checkpoint.loss_trace)
        model.eval()

        return model
