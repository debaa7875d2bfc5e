#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from libdemark.demark.attack_model import AttackModel
from libdemark.demark.trainer import train_attack
from libdemark.harness.components import obtain_attack_model, obtain_watermarker
from libdemark.harness.evaluation import draw_messages, embed_all
from libdemark.harness.experiment_config import DispersalMode
from libdemark.harness.plots import plot_latent_maps, plot_slr_histograms
from libdemark.imagekit.dataset import load_dataset
from libdemark.liblog import liblog
from libdemark.losses.weights import LossWeights
from libdemark.metrics.dispersal import (
    DispersalReport,
    intensity_redistribution,
    positional_redistribution,
    slr,
    sparsity_change,
)
from libdemark.utils.exceptions import ConfigError, DegenerateSupportError
from libdemark.watermarklab.scheme import ReferenceScheme

if TYPE_CHECKING:
    from libdemark.harness.experiment_config import ExperimentConfig
    from libdemark.metrics.latent import Latent

DISPERSAL_JSON = "dispersal.json"
SLR_HISTOGRAM = "slr_hist.png"
LATENT_MAPS = "latent_maps.png"


@dataclass
class DispersalStudy:
    """The per-image dispersal reports of one study and the SLR values of every latent family."""

    mode: DispersalMode
    tau: float
    provenance: dict[str, Any]
    reports: list[DispersalReport]
    slrs: dict[str, list[float]] = field(default_factory=dict)

    def medians(self: DispersalStudy) -> dict[str, float | None]:
        """Returns the median SC, IR and PR. PR ignores images without significant coefficients."""
        pr = [r.pr for r in self.reports if not math.isnan(r.pr)]

        return {
            "sc": float(np.median([r.sc for r in self.reports])),
            "ir": float(np.median([r.ir for r in self.reports])),
            "pr": float(np.median(pr)) if pr else None,
        }

    def to_dict(self: DispersalStudy) -> dict[str, Any]:
        """Returns the JSON form. Undefined PR values are written as null."""
        rows = []
        for index, report in enumerate(self.reports):
            row = {"image_id": index, **report.to_dict()}
            row["pr"] = None if math.isnan(report.pr) else report.pr
            rows.append(row)

        return {
            "mode": self.mode.value,
            "tau": self.tau,
            "provenance": self.provenance,
            "rows": rows,
            "medians": self.medians(),
            "slr_medians": {label: float(np.median(values)) for label, values in self.slrs.items()},
        }


def compare_latents(Z: Latent, z: Latent, tau: float) -> DispersalReport:
    """Returns the dispersal report of Z against z, with PR = NaN when either has no significant coefficient."""
    try:
        pr = positional_redistribution(Z, z, tau)
    except DegenerateSupportError:
        pr = float("nan")

    return DispersalReport(
        sc=sparsity_change(Z, z, tau),
        ir=intensity_redistribution(Z, z),
        pr=pr,
        slr_sparse=slr(Z, tau),
        slr_reference=slr(z, tau),
        tau=tau,
    )


def _alpha_label(model: AttackModel) -> str:
    return f"alpha={model.config.weights.alpha:g}"


def _train_with_alpha(cfg: ExperimentConfig, base: AttackModel, alpha: float) -> AttackModel:
    config = replace(base.config, weights=LossWeights(alpha=alpha, beta=base.config.weights.beta))
    path = Path(cfg.output_dir) / f"attack_model_alpha{alpha:g}.ckpt"

    if path.is_file():
        model = AttackModel.load(path)
        if model.config == config:
            return model

    model = train_attack(cfg.training_dataset, config)
    model.save(path)

    return model


def _paired_models(cfg: ExperimentConfig) -> tuple[AttackModel, AttackModel]:
    settings = cfg.dispersal

    if settings.sparse_checkpoint is not None:
        sparse = AttackModel.load(settings.sparse_checkpoint)
    else:
        sparse = obtain_attack_model(cfg)

    if settings.reference_checkpoint is not None:
        reference = AttackModel.load(settings.reference_checkpoint)
    else:
        reference = _train_with_alpha(cfg, sparse, 0.0)

    if reference.config.seed != sparse.config.seed:
        raise ConfigError(
            f"Paired attack models must share their seed, got {reference.config.seed} and {sparse.config.seed}."
        )

    return reference, sparse


def run_dispersal_study(cfg: ExperimentConfig, mode: DispersalMode | str | None = None) -> DispersalStudy:
    """Measures how the sparse attack latent disperses against a reference latent.

    In paired-alpha mode the reference is the latent of an attack model trained with alpha = 0 on
    the same data and seed. In whitebox-probe mode it is the watermarker's own fused latent of the
    embedded image. Writes dispersal.json, slr_hist.png and latent_maps.png.

    Args:
        cfg (ExperimentConfig): The experiment.
        mode (DispersalMode | str, optional): Overrides cfg.dispersal.mode. Defaults to None.

    Returns:
        DispersalStudy: The per-image reports and SLR values.
    """
    mode = DispersalMode(mode or cfg.dispersal.mode)

    images = load_dataset(cfg.evaluation_dataset)
    if cfg.dispersal.count is not None:
        images = images[: cfg.dispersal.count]

    slrs: dict[str, list[float]] = {}

    match mode:
        case DispersalMode.PAIRED_ALPHA:
            reference, sparse = _paired_models(cfg)

            reference_latents = reference.encode_batch(images)
            sparse_latents = sparse.encode_batch(images)

            reference_label = _alpha_label(reference)
            if reference_label == _alpha_label(sparse):
                reference_label += " (reference)"

            slrs[reference_label] = [slr(z, cfg.tau) for z in reference_latents]
            provenance = {"reference": reference.config.config_hash, "sparse": sparse.config.config_hash}
        case DispersalMode.WHITEBOX_PROBE:
            watermarker = obtain_watermarker(cfg)
            sparse = obtain_attack_model(cfg)

            messages = draw_messages(len(images), watermarker.message_length, cfg.seed)
            watermarked = embed_all(ReferenceScheme(watermarker), images, messages)

            reference_latents = [watermarker.probe_latent(x, m) for x, m in zip(images, messages)]
            sparse_latents = sparse.encode_batch(watermarked)

            slrs["watermarker latent"] = [slr(z, cfg.tau) for z in reference_latents]
            provenance = {"watermarker": watermarker.config.config_hash, "sparse": sparse.config.config_hash}

    slrs[_alpha_label(sparse)] = [slr(Z, cfg.tau) for Z in sparse_latents]

    for alpha in cfg.dispersal.histogram_alphas:
        model = _train_with_alpha(cfg, sparse, alpha)
        label = _alpha_label(model)
        if label not in slrs:
            slrs[label] = [slr(Z, cfg.tau) for Z in model.encode_batch(images)]

    reports = [compare_latents(Z, z, cfg.tau) for Z, z in zip(sparse_latents, reference_latents)]

    degenerate = sum(math.isnan(r.pr) for r in reports)
    if degenerate:
        liblog.warning(f"{degenerate} images have no significant coefficient in one latent; their PR is undefined.")

    study = DispersalStudy(
        mode=mode,
        tau=cfg.tau,
        provenance={"config_hash": cfg.config_hash, "seed": cfg.seed, **provenance},
        reports=reports,
        slrs=slrs,
    )

    output_dir = Path(cfg.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    (output_dir / DISPERSAL_JSON).write_text(json.dumps(study.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    plot_slr_histograms(slrs, cfg.tau, output_dir / SLR_HISTOGRAM)
    plot_latent_maps({"reference": reference_latents[0], "sparse": sparse_latents[0]}, output_dir / LATENT_MAPS)

    liblog.harness(f"Dispersal study ({mode.value}) on {len(images)} images: {study.medians()}.")

    return study
