#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import time
from typing import TYPE_CHECKING, Callable, Sequence, TypeVar

import numpy as np

from libdemark.attacks.attack import DeMarkAttack
from libdemark.attacks.registry import DEMARK_ATTACK, AttackRegistry, attack_registry, distortion_attack_from_dict
from libdemark.harness.components import obtain_attack_model, obtain_scheme
from libdemark.harness.experiment_config import DetectionMode
from libdemark.harness.reports import AttackSummary, EvalReport, ImageRow
from libdemark.imagekit.dataset import load_dataset
from libdemark.liblog import liblog
from libdemark.losses.embedder_provider import embedder_provider
from libdemark.metrics.detection import (
    attack_success_rate,
    bit_accuracy,
    detection_rate,
    detection_threshold,
    tpr_at_fpr,
)
from libdemark.metrics.dispersal import slr
from libdemark.metrics.latent import BitMessage
from libdemark.metrics.quality import frechet_feature_distance, perceptual_distance, psnr, ssim_index
from libdemark.utils.exceptions import MetricDomainError, RegistryError, UnachievableThresholdError
from libdemark.utils.seeding import derive_seed

if TYPE_CHECKING:
    from libdemark.demark.attack_model import AttackModel
    from libdemark.harness.experiment_config import ExperimentConfig
    from libdemark.imagekit.image_tensor import ImageTensor
    from libdemark.watermarklab.scheme import WatermarkScheme

EVAL_BATCH_SIZE = 32

# Salts of the evaluation random streams
MESSAGE_STREAM = 11
NEGATIVE_KEY_STREAM = 12

T = TypeVar("T")


def _chunked(fn: Callable[[Sequence[ImageTensor]], list[T]], images: Sequence[ImageTensor]) -> list[T]:
    results: list[T] = []

    for start in range(0, len(images), EVAL_BATCH_SIZE):
        results.extend(fn(images[start : start + EVAL_BATCH_SIZE]))

    return results


def _median(values: list[float]) -> float:
    return float(np.median(values))


def draw_messages(count: int, length: int, seed: int, stream: int = MESSAGE_STREAM) -> list[BitMessage]:
    """Draws one random key per image from a seeded stream."""
    rng = np.random.default_rng(derive_seed(seed, stream))
    return [BitMessage.random(length, rng) for _ in range(count)]


def build_registry(cfg: ExperimentConfig, attack_model: AttackModel | None = None) -> AttackRegistry:
    """Returns the attack registry of an experiment."""
    return attack_registry(
        attack_model=attack_model,
        strengths=cfg.attack_strengths,
        extra=[distortion_attack_from_dict(entry) for entry in cfg.attack_entries],
        seed=cfg.seed,
    )


def check_attack_names(cfg: ExperimentConfig) -> None:
    """Raises RegistryError for an unknown attack name, before any component is loaded or trained."""
    known = set(build_registry(cfg)) | {DEMARK_ATTACK}
    unknown = [name for name in cfg.attacks if name not in known]

    if unknown:
        raise RegistryError(f"Unknown attacks {unknown}; available: {sorted(known)}.")


def embed_all(scheme: WatermarkScheme, images: Sequence[ImageTensor], messages: Sequence[BitMessage]) -> list[ImageTensor]:
    """Watermarks every image with its own message, in chunks."""
    watermarked: list[ImageTensor] = []

    for start in range(0, len(images), EVAL_BATCH_SIZE):
        stop = start + EVAL_BATCH_SIZE
        watermarked.extend(scheme.embed_batch(images[start:stop], messages[start:stop]))

    return watermarked


def detect_bitaccs(
    scheme: WatermarkScheme,
    images: Sequence[ImageTensor],
    messages: Sequence[BitMessage],
) -> tuple[list[float], list[BitMessage]]:
    """Returns the bit accuracy of every image against its message, and the recovered messages."""
    detections = _chunked(scheme.detect_batch, images)
    recovered = [bits for bits, _ in detections]
    return [bit_accuracy(m, bits) for m, bits in zip(messages, recovered)], recovered


def evaluate_attacks(
    scheme: WatermarkScheme,
    registry: AttackRegistry,
    attack_names: Sequence[str],
    images: Sequence[ImageTensor],
    cfg: ExperimentConfig,
) -> EvalReport:
    """Embeds a random key in every image, runs every attack and scores detection and quality.

    Attacks only ever receive the watermarked images. Quality metrics compare the attacked image
    against the watermarked one.

    Args:
        scheme (WatermarkScheme): The scheme under attack.
        registry (AttackRegistry): The available attacks.
        attack_names (Sequence[str]): The attacks to evaluate, in order.
        images (Sequence[ImageTensor]): The cover images.
        cfg (ExperimentConfig): The experiment, for metrics and calibration constants.

    Returns:
        EvalReport: The per-image rows and per-attack aggregates.
    """
    registry.check_names(list(attack_names))

    if not images:
        raise MetricDomainError("Evaluation needs at least one test image.")

    metrics = set(cfg.metrics)
    length = scheme.message_length

    messages = draw_messages(len(images), length, cfg.seed)
    watermarked = embed_all(scheme, images, messages)

    threshold = None
    try:
        threshold = detection_threshold(length, cfg.fpr)
    except UnachievableThresholdError as e:
        liblog.warning(f"No analytic detection threshold: {e}")

    negative_scores = None
    if "detectacc" in metrics and cfg.detection_mode == DetectionMode.EMPIRICAL:
        keys = draw_messages(len(images), length, cfg.seed, NEGATIVE_KEY_STREAM)
        negative_scores, _ = detect_bitaccs(scheme, images, keys)

    embedder = None
    if metrics & {"perceptual", "frechet"}:
        embedder = embedder_provider.get_embedder(cfg.embedder_seed)

    rows: list[ImageRow] = []
    summaries: dict[str, AttackSummary] = {}
    seconds_per_image: dict[str, float] = {}
    attack_model_bytes = 0

    liblog.harness(f"Evaluating {len(attack_names)} attacks on {len(images)} images against {scheme!r}.")

    for name in attack_names:
        attack = registry[name]
        attack_model_bytes = max(attack_model_bytes, attack.parameter_bytes)

        start = time.perf_counter()
        attacked = _chunked(attack.attack_batch, watermarked)
        seconds_per_image[name] = (time.perf_counter() - start) / len(images)

        bitaccs, recovered = detect_bitaccs(scheme, attacked, messages)

        psnrs = [psnr(a, w) for a, w in zip(attacked, watermarked)] if "psnr" in metrics else None
        ssims = [ssim_index(a, w) for a, w in zip(attacked, watermarked)] if "ssim" in metrics else None
        perceptuals = (
            [perceptual_distance(a, w, embedder) for a, w in zip(attacked, watermarked)]
            if "perceptual" in metrics
            else None
        )

        for index in range(len(images)):
            rows.append(
                ImageRow(
                    image_id=index,
                    attack=name,
                    bitacc=bitaccs[index],
                    psnr=psnrs[index] if psnrs else None,
                    ssim=ssims[index] if ssims else None,
                    perceptual=perceptuals[index] if perceptuals else None,
                )
            )

        detectacc = None
        if "detectacc" in metrics:
            if negative_scores is not None:
                detectacc = tpr_at_fpr(bitaccs, negative_scores, cfg.fpr)
            elif threshold is not None:
                detectacc = detection_rate(bitaccs, length, cfg.fpr)

        frechet = None
        if "frechet" in metrics:
            try:
                frechet = frechet_feature_distance(attacked, watermarked, embedder)
            except MetricDomainError as e:
                liblog.warning(f"No Fréchet distance for {name}: {e}")

        slr_median = None
        if "dispersal" in metrics and isinstance(attack, DeMarkAttack):
            latents = _chunked(attack.model.encode_batch, watermarked)
            slr_median = _median([slr(Z, cfg.tau) for Z in latents])

        summaries[name] = AttackSummary(
            attack=name,
            bitacc_mean=float(np.mean(bitaccs)),
            detectacc=detectacc,
            psnr_median=_median(psnrs) if psnrs else None,
            ssim_median=_median(ssims) if ssims else None,
            perceptual_median=_median(perceptuals) if perceptuals else None,
            frechet=frechet,
            attack_success_rate=attack_success_rate(messages, recovered),
            slr_median=slr_median,
        )

        liblog.harness(
            f"{name}: BitAcc {summaries[name].bitacc_mean:.4f}, DetectAcc {detectacc}, "
            f"{seconds_per_image[name] * 1000:.2f} ms/image."
        )

    provenance = {
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "scheme": scheme.name,
        "scheme_type": scheme.scheme_type,
        "message_length": length,
        "fpr": cfg.fpr,
        "tau": cfg.tau,
        "detection_mode": cfg.detection_mode.value,
        "detection_threshold": threshold,
        "image_count": len(images),
        "embed_psnr_median": _median([psnr(w, x) for w, x in zip(watermarked, images)]),
    }

    cost = {"seconds_per_image": seconds_per_image, "attack_model_bytes": attack_model_bytes}

    return EvalReport(provenance=provenance, summaries=summaries, rows=rows, cost=cost)


def run_evaluation(cfg: ExperimentConfig) -> EvalReport:
    """Runs the train → embed → attack → evaluate pipeline and writes report.json, report.csv and cost.json.

    Unknown attack names are rejected before anything is loaded, trained or written.

    Args:
        cfg (ExperimentConfig): The experiment.

    Returns:
        EvalReport: The written report.
    """
    check_attack_names(cfg)

    scheme = obtain_scheme(cfg)
    attack_model = obtain_attack_model(cfg) if DEMARK_ATTACK in cfg.attacks else None

    images = load_dataset(cfg.evaluation_dataset)
    report = evaluate_attacks(scheme, build_registry(cfg, attack_model), cfg.attacks, images, cfg)

    json_path, csv_path, cost_path = report.write(cfg.output_dir)
    liblog.harness(f"Wrote {json_path}, {csv_path} and {cost_path}.")

    return report
