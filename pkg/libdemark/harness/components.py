#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING

from libdemark.demark.attack_model import AttackModel
from libdemark.demark.trainer import train_attack
from libdemark.liblog import liblog
from libdemark.utils.exceptions import ConfigError
from libdemark.watermarklab.scheme_registry import REFERENCE_SCHEME, resolve_scheme
from libdemark.watermarklab.trainer import train_watermarker
from libdemark.watermarklab.watermarker import Watermarker

if TYPE_CHECKING:
    from libdemark.harness.experiment_config import ExperimentConfig
    from libdemark.watermarklab.scheme import WatermarkScheme


def obtain_watermarker(cfg: ExperimentConfig, train_if_missing: bool = True) -> Watermarker:
    """Loads the reference scheme checkpoint, or trains and saves it when a configuration is given.

    Args:
        cfg (ExperimentConfig): The experiment.
        train_if_missing (bool, optional): Whether a missing checkpoint may be trained. Defaults to True.

    Returns:
        Watermarker: The trained scheme.
    """
    path = cfg.watermarker_path

    if path.is_file():
        liblog.harness(f"Loading the watermarker from {path}.")
        return Watermarker.load(path)

    if cfg.watermarker_checkpoint is not None or cfg.watermarker is None or not train_if_missing:
        raise ConfigError(f"Watermarker checkpoint {path} does not exist and no training configuration was given.")

    watermarker = train_watermarker(cfg.training_dataset, cfg.watermarker)
    watermarker.save(path)
    liblog.harness(f"Saved the watermarker to {path}.")

    return watermarker


def obtain_attack_model(cfg: ExperimentConfig, train_if_missing: bool = True) -> AttackModel:
    """Loads the attack model checkpoint, or trains and saves it when a configuration is given.

    Args:
        cfg (ExperimentConfig): The experiment.
        train_if_missing (bool, optional): Whether a missing checkpoint may be trained. Defaults to True.

    Returns:
        AttackModel: The trained attack model.
    """
    path = cfg.attack_model_path

    if path.is_file():
        liblog.harness(f"Loading the attack model from {path}.")
        return AttackModel.load(path)

    if cfg.attack_model_checkpoint is not None or cfg.attack_model is None or not train_if_missing:
        raise ConfigError(f"Attack model checkpoint {path} does not exist and no training configuration was given.")

    model = train_attack(cfg.training_dataset, cfg.attack_model)
    model.save(path)
    liblog.harness(f"Saved the attack model to {path}.")

    return model


def obtain_scheme(cfg: ExperimentConfig) -> WatermarkScheme:
    """Resolves the scheme under attack, loading or training the reference scheme if it is the one."""
    if cfg.scheme == REFERENCE_SCHEME:
        return resolve_scheme(REFERENCE_SCHEME, obtain_watermarker(cfg))

    return resolve_scheme(cfg.scheme)
