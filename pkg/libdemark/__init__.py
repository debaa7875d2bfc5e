#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

__version__ = "0.1.0"

from .attacks.registry import attack_registry
from .demark.attack_model import AttackModel
from .demark.config import AttackModelConfig
from .demark.trainer import train_attack
from .harness.evaluation import run_evaluation
from .harness.experiment_config import ExperimentConfig, load_experiment_config
from .watermarklab.scheme_registry import register_external_scheme, resolve_scheme

__all__ = [
    "AttackModel",
    "AttackModelConfig",
    "ExperimentConfig",
    "attack_registry",
    "load_experiment_config",
    "register_external_scheme",
    "resolve_scheme",
    "run_evaluation",
    "train_attack",
]
