#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import time
from typing import Sequence

import torch
from tqdm import tqdm

from libdemark.demark.attack_model import AttackModel
from libdemark.demark.config import AttackModelConfig
from libdemark.imagekit.dataset import DatasetSpec, resolve_images
from libdemark.imagekit.image_tensor import ImageTensor, stack_images
from libdemark.liblog import liblog
from libdemark.losses.embedder_provider import embedder_provider
from libdemark.losses.objectives import l_sel, l_spl, total_loss
from libdemark.utils.exceptions import BudgetExceededError, TrainingFailureError
from libdemark.utils.seeding import derive_seed, torch_generator


def train_attack(
    data: DatasetSpec | Sequence[ImageTensor],
    config: AttackModelConfig,
    deadline: float | None = None,
) -> AttackModel:
    """Trains the sparse encoder and reconstructor on unwatermarked images.

    Every step minimizes alpha * L_SEL(Z) + beta * L_SPL(x, x_tilde) over a mini-batch,
    the losses being averaged over the batch.

    Args:
        data (DatasetSpec | Sequence[ImageTensor]): The training images.
        config (AttackModelConfig): The model and training configuration.
        deadline (float, optional): A time.monotonic() instant after which training stops with
            BudgetExceededError. Defaults to None.

    Returns:
        AttackModel: The trained model, in evaluation mode, with one training_log entry per epoch.
    """
    images = resolve_images(data)
    batch = stack_images(images)

    model = AttackModel(config)
    model.encoder.check_dimensions(batch.shape[2], batch.shape[3])

    embedder = embedder_provider.get_embedder(config.embedder_seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    generator = torch_generator(derive_seed(config.seed, len(images)))

    liblog.demark(
        f"Training the attack model on {len(images)} images for {config.epochs} epochs "
        f"(alpha={config.weights.alpha}, beta={config.weights.beta}, variant={config.spl_variant.value})."
    )

    model.train()

    for epoch in tqdm(range(config.epochs), desc="demark", unit="epoch", disable=None):
        order = torch.randperm(len(images), generator=generator)
        epoch_loss = 0.0

        for start in range(0, len(images), config.batch_size):
            x = batch[order[start : start + config.batch_size]]

            z, x_tilde = model(x)
            loss = total_loss(l_sel(z), l_spl(x, x_tilde, embedder, config.spl_variant), config.weights)

            if not torch.isfinite(loss):
                raise TrainingFailureError(f"The attack model loss diverged at epoch {epoch + 1}.")

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            epoch_loss += float(loss.detach()) * x.shape[0]

        model.training_log.append(epoch_loss / len(images))
        liblog.debug(f"Epoch {epoch + 1}/{config.epochs}: mean loss {model.training_log[-1]:.6f}")

        if deadline is not None and time.monotonic() > deadline and epoch + 1 < config.epochs:
            model.eval()
            raise BudgetExceededError(f"The time budget ran out after {epoch + 1} attack-model epochs.", partial=model)

    model.eval()

    liblog.demark(f"Training done: mean loss {model.training_log[0]:.6f} -> {model.training_log[-1]:.6f}.")

    return model
