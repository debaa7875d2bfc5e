#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import copy
from typing import Sequence

import torch
from tqdm import tqdm

from libdemark.imagekit.dataset import DatasetSpec, resolve_images
from libdemark.imagekit.image_tensor import ImageTensor, stack_images
from libdemark.liblog import liblog
from libdemark.losses.objectives import (
    SWLossComponents,
    bce_message_loss,
    gan_pair_losses,
    l_sel,
    perceptual_integrity_loss,
    sw_total_loss,
)
from libdemark.metrics.latent import BitMessage
from libdemark.utils.exceptions import MetricDomainError, TrainingFailureError
from libdemark.utils.seeding import derive_seed, torch_generator
from libdemark.watermarklab.config import WatermarkerConfig
from libdemark.watermarklab.noise_layers import apply_noise_layer
from libdemark.watermarklab.watermarker import Watermarker

# Salts separating the random streams of one training run
_ORDER_STREAM = 1
_MESSAGE_STREAM = 2
_NOISE_STREAM = 3


def train_watermarker(data: DatasetSpec | Sequence[ImageTensor], config: WatermarkerConfig) -> Watermarker:
    """Trains the reference scheme by alternating discriminator and embedder/detector steps.

    Every batch draws fresh random messages. The embedder and detector minimize the weighted sum
    of pixel MSE, message BCE, generator loss and (in sparse mode) the L1 norm of the latent.

    Args:
        data (DatasetSpec | Sequence[ImageTensor]): The cover images.
        config (WatermarkerConfig): The scheme and training configuration.

    Returns:
        Watermarker: The trained scheme, in evaluation mode.
    """
    images = resolve_images(data)
    batch = stack_images(images)

    watermarker = Watermarker(config)
    weights = config.effective_weights

    main_optimizer = torch.optim.Adam(
        [*watermarker.embedder.parameters(), *watermarker.detector.parameters()], lr=config.learning_rate
    )
    discriminator_optimizer = torch.optim.Adam(watermarker.discriminator.parameters(), lr=config.learning_rate)

    order_generator = torch_generator(derive_seed(config.seed, _ORDER_STREAM))
    message_generator = torch_generator(derive_seed(config.seed, _MESSAGE_STREAM))
    noise_generator = torch_generator(derive_seed(config.seed, _NOISE_STREAM))

    mode = "sparse" if config.sparse_mode else "plain"
    liblog.watermark(f"Training the {mode} reference scheme on {len(images)} images for {config.epochs} epochs.")

    watermarker.train()

    for epoch in tqdm(range(config.epochs), desc="watermarker", unit="epoch", disable=None):
        order = torch.randperm(len(images), generator=order_generator)
        epoch_loss = 0.0

        for start in range(0, len(images), config.batch_size):
            x = batch[order[start : start + config.batch_size]]
            bits = torch.randint(0, 2, (x.shape[0], config.message_length), generator=message_generator).float()

            # Discriminator step on detached watermarked images
            with torch.no_grad():
                _, x_m = watermarker.watermark_tensor(x, bits)

            discriminator_loss, _ = gan_pair_losses(watermarker.discriminator(x), watermarker.discriminator(x_m))

            discriminator_optimizer.zero_grad()
            discriminator_loss.backward()
            discriminator_optimizer.step()

            # Embedder and detector step
            z, x_m = watermarker.watermark_tensor(x, bits)

            received = x_m
            if config.noise_layers:
                pick = int(torch.randint(0, len(config.noise_layers), (1,), generator=noise_generator))
                received = apply_noise_layer(config.noise_layers[pick], x_m, noise_generator)

            logits = watermarker.detector(received)
            _, generator_loss = gan_pair_losses(watermarker.discriminator(x).detach(), watermarker.discriminator(x_m))

            components = SWLossComponents(
                integrity=perceptual_integrity_loss(x, x_m),
                extraction=bce_message_loss(logits, bits),
                gan=generator_loss,
                sparse=l_sel(z),
            )
            loss = sw_total_loss(components, weights)

            if not torch.isfinite(loss) or not torch.isfinite(discriminator_loss):
                raise TrainingFailureError(f"The watermarker loss diverged at epoch {epoch + 1}.")

            main_optimizer.zero_grad()
            loss.backward()
            main_optimizer.step()

            epoch_loss += float(loss.detach()) * x.shape[0]

        watermarker.training_log.append(epoch_loss / len(images))
        liblog.debug(f"Epoch {epoch + 1}/{config.epochs}: mean loss {watermarker.training_log[-1]:.6f}")

    watermarker.eval()

    liblog.watermark(
        f"Training done: mean loss {watermarker.training_log[0]:.6f} -> {watermarker.training_log[-1]:.6f}."
    )

    return watermarker


def adversarial_finetune(
    watermarker: Watermarker,
    attacked_pairs: Sequence[tuple[ImageTensor, BitMessage]],
    epochs: int,
    clean_pairs: Sequence[tuple[ImageTensor, BitMessage]] | None = None,
) -> Watermarker:
    """Fine-tunes the detector on attacked images so it recovers their original messages.

    Only the detector is trained; the embedder and discriminator are left bit-identical.

    Args:
        watermarker (Watermarker): The scheme to fine-tune. It is not modified.
        attacked_pairs (Sequence[tuple[ImageTensor, BitMessage]]): Attacked images and the messages they were embedded with.
        epochs (int): The number of passes. Zero returns an unchanged copy.
        clean_pairs (Sequence[tuple[ImageTensor, BitMessage]], optional): Unattacked watermarked images mixed into
            every epoch to keep clean accuracy. Defaults to None.

    Returns:
        Watermarker: The fine-tuned copy.
    """
    if not attacked_pairs:
        raise MetricDomainError("Adversarial fine-tuning needs at least one attacked image.")

    if epochs < 0:
        raise MetricDomainError(f"The number of fine-tuning epochs must be non-negative, got {epochs}.")

    tuned = copy.deepcopy(watermarker)

    if epochs == 0:
        return tuned

    pairs = [*attacked_pairs, *(clean_pairs or ())]

    for m in (m for _, m in pairs):
        tuned._check_message(m)

    x_all = stack_images([image for image, _ in pairs])
    bits_all = torch.cat([m.to_torch() for _, m in pairs])

    config = tuned.config
    optimizer = torch.optim.Adam(tuned.detector.parameters(), lr=config.learning_rate)
    generator = torch_generator(derive_seed(config.seed, len(pairs)))

    liblog.watermark(
        f"Fine-tuning the detector on {len(attacked_pairs)} attacked and {len(pairs) - len(attacked_pairs)} "
        f"clean images for {epochs} epochs."
    )

    tuned.detector.train()

    for epoch in tqdm(range(epochs), desc="finetune", unit="epoch", disable=None):
        order = torch.randperm(len(pairs), generator=generator)

        for start in range(0, len(pairs), config.batch_size):
            index = order[start : start + config.batch_size]
            loss = bce_message_loss(tuned.detector(x_all[index]), bits_all[index])

            if not torch.isfinite(loss):
                raise TrainingFailureError(f"The fine-tuning loss diverged at epoch {epoch + 1}.")

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    tuned.eval()

    return tuned
