#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from libdemark.attacks.attack import DeMarkAttack
from libdemark.harness.components import obtain_attack_model, obtain_watermarker
from libdemark.harness.evaluation import detect_bitaccs, draw_messages, embed_all
from libdemark.imagekit.dataset import load_dataset
from libdemark.liblog import liblog
from libdemark.utils.exceptions import ConfigError
from libdemark.watermarklab.scheme import ReferenceScheme
from libdemark.watermarklab.scheme_registry import REFERENCE_SCHEME
from libdemark.watermarklab.trainer import adversarial_finetune

if TYPE_CHECKING:
    from libdemark.harness.experiment_config import ExperimentConfig
    from libdemark.imagekit.image_tensor import ImageTensor
    from libdemark.metrics.latent import BitMessage
    from libdemark.watermarklab.watermarker import Watermarker

FINETUNE_JSON = "finetune.json"
FINETUNED_CHECKPOINT_NAME = "watermarker_finetuned.ckpt"


@dataclass(frozen=True)
class FinetuneOutcome:
    """Mean bit accuracies on the held-out images before and after detector fine-tuning."""

    attacked_before: float
    attacked_after: float
    clean_before: float
    clean_after: float
    train_count: int
    heldout_count: int
    epochs: int
    clean_replay: bool

    def to_dict(self: FinetuneOutcome) -> dict[str, Any]:
        return asdict(self)


def _mean_bitacc(watermarker: Watermarker, images: list[ImageTensor], messages: list[BitMessage]) -> float:
    bitaccs, _ = detect_bitaccs(ReferenceScheme(watermarker), images, messages)
    return float(np.mean(bitaccs))


def run_finetune(cfg: ExperimentConfig) -> FinetuneOutcome:
    """Fine-tunes the reference detector on DeMark-attacked images and measures the recovered accuracy.

    The test images are split by cfg.finetune.train_fraction. The first part is attacked and used for
    fine-tuning; the held-out part measures attacked and clean bit accuracy before and after.
    Writes finetune.json and the fine-tuned checkpoint.

    Args:
        cfg (ExperimentConfig): The experiment. Its scheme must be the reference scheme.

    Returns:
        FinetuneOutcome: The before and after accuracies.
    """
    if cfg.scheme != REFERENCE_SCHEME:
        raise ConfigError(f"Only the reference scheme can be fine-tuned, got {cfg.scheme!r}.")

    settings = cfg.finetune

    watermarker = obtain_watermarker(cfg)
    attack = DeMarkAttack(obtain_attack_model(cfg))

    images = load_dataset(cfg.evaluation_dataset)
    split = int(round(len(images) * settings.train_fraction))

    if split < 1 or split >= len(images):
        raise ConfigError(
            f"Splitting {len(images)} images at fraction {settings.train_fraction} leaves an empty part."
        )

    messages = draw_messages(len(images), watermarker.message_length, cfg.seed)
    watermarked = embed_all(ReferenceScheme(watermarker), images, messages)
    attacked = attack.attack_batch(watermarked)

    train_pairs = list(zip(attacked[:split], messages[:split]))
    clean_pairs = list(zip(watermarked[:split], messages[:split])) if settings.clean_replay else None

    heldout_messages = messages[split:]
    heldout_attacked = attacked[split:]
    heldout_clean = watermarked[split:]

    attacked_before = _mean_bitacc(watermarker, heldout_attacked, heldout_messages)
    clean_before = _mean_bitacc(watermarker, heldout_clean, heldout_messages)

    tuned = adversarial_finetune(watermarker, train_pairs, settings.epochs, clean_pairs=clean_pairs)

    outcome = FinetuneOutcome(
        attacked_before=attacked_before,
        attacked_after=_mean_bitacc(tuned, heldout_attacked, heldout_messages),
        clean_before=clean_before,
        clean_after=_mean_bitacc(tuned, heldout_clean, heldout_messages),
        train_count=split,
        heldout_count=len(images) - split,
        epochs=settings.epochs,
        clean_replay=settings.clean_replay,
    )

    output_dir = Path(cfg.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    tuned.save(output_dir / FINETUNED_CHECKPOINT_NAME)
    payload = {"provenance": {"config_hash": cfg.config_hash, "seed": cfg.seed}, **outcome.to_dict()}
    (output_dir / FINETUNE_JSON).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")

    liblog.harness(
        f"Detector fine-tuning: attacked BitAcc {outcome.attacked_before:.4f} -> {outcome.attacked_after:.4f}, "
        f"clean BitAcc {outcome.clean_before:.4f} -> {outcome.clean_after:.4f}."
    )

    return outcome
