#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import itertools
import time
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import pandas as pd

from libdemark.attacks.attack import DeMarkAttack
from libdemark.attacks.registry import AttackRegistry
from libdemark.demark.config import AttackModelConfig
from libdemark.demark.trainer import train_attack
from libdemark.harness.components import obtain_scheme
from libdemark.harness.evaluation import evaluate_attacks
from libdemark.imagekit.dataset import load_dataset
from libdemark.liblog import liblog
from libdemark.losses.objectives import SPLVariant
from libdemark.losses.weights import LossWeights
from libdemark.utils.exceptions import BudgetExceededError, ConfigError

if TYPE_CHECKING:
    from libdemark.harness.experiment_config import ExperimentConfig

ABLATION_CSV = "ablation.csv"
ABLATION_COLUMNS = ("alpha", "variant", "bitacc", "detectacc", "psnr", "ssim", "perceptual", "final_loss")
ABLATION_METRICS = ("bitacc", "detectacc", "psnr", "ssim", "perceptual")


def _write_table(rows: list[dict], output_dir: Path) -> pd.DataFrame:
    table = pd.DataFrame(rows, columns=list(ABLATION_COLUMNS))
    output_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(output_dir / ABLATION_CSV, index=False)
    return table


def run_ablation(
    cfg: ExperimentConfig,
    alphas: Sequence[float] | None = None,
    variants: Sequence[SPLVariant | str] | None = None,
) -> pd.DataFrame:
    """Trains one attack model per (alpha, variant) cell and evaluates it against the scheme.

    Every cell shares the data and seed of the experiment's attack model configuration. When the
    wall-clock budget runs out, the completed cells are written and BudgetExceededError carries them.

    Args:
        cfg (ExperimentConfig): The experiment.
        alphas (Sequence[float], optional): The sparsity weights. Defaults to cfg.ablation.alphas.
        variants (Sequence[SPLVariant | str], optional): The loss variants. Defaults to cfg.ablation.variants.

    Returns:
        pd.DataFrame: One row per cell, also written to ablation.csv.
    """
    alphas = [float(a) for a in (alphas if alphas is not None else cfg.ablation.alphas)]
    variants = [SPLVariant(v) for v in (variants if variants is not None else cfg.ablation.variants)]

    if len(set(alphas)) < 2 and len(set(variants)) < 2:
        raise ConfigError("An ablation needs at least two alphas or two loss variants.")

    if not alphas or not variants:
        raise ConfigError("An ablation needs at least one alpha and one loss variant.")

    base = cfg.attack_model or AttackModelConfig()
    deadline = time.monotonic() + cfg.budget_minutes * 60.0
    output_dir = Path(cfg.output_dir)

    scheme = obtain_scheme(cfg)
    images = load_dataset(cfg.evaluation_dataset)
    eval_cfg = replace(cfg, metrics=ABLATION_METRICS)

    rows: list[dict] = []

    for alpha, variant in itertools.product(alphas, variants):
        liblog.harness(f"Ablation cell alpha={alpha:g}, variant={variant.value}.")

        config = replace(base, weights=LossWeights(alpha=alpha, beta=base.weights.beta), spl_variant=variant)

        try:
            model = train_attack(cfg.training_dataset, config, deadline=deadline)
        except BudgetExceededError as e:
            table = _write_table(rows, output_dir)
            raise BudgetExceededError(f"{e} {len(rows)} ablation cells completed.", partial=table) from e

        registry = AttackRegistry()
        registry.add(DeMarkAttack(model))
        summary = evaluate_attacks(scheme, registry, ["demark"], images, eval_cfg).summaries["demark"]

        rows.append(
            {
                "alpha": alpha,
                "variant": variant.value,
                "bitacc": summary.bitacc_mean,
                "detectacc": summary.detectacc,
                "psnr": summary.psnr_median,
                "ssim": summary.ssim_median,
                "perceptual": summary.perceptual_median,
                "final_loss": model.training_log[-1],
            }
        )

        if time.monotonic() > deadline and len(rows) < len(alphas) * len(variants):
            table = _write_table(rows, output_dir)
            raise BudgetExceededError(
                f"The time budget ran out after {len(rows)} of {len(alphas) * len(variants)} ablation cells.",
                partial=table,
            )

    return _write_table(rows, output_dir)
