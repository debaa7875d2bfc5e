#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any

from libdemark.demark.config import AttackModelConfig
from libdemark.imagekit.dataset import DatasetSpec
from libdemark.losses.objectives import SPLVariant
from libdemark.metrics.detection import DEFAULT_FPR
from libdemark.metrics.dispersal import DEFAULT_TAU
from libdemark.utils.exceptions import ConfigError, DatasetSpecError
from libdemark.utils.hashing import stable_hash
from libdemark.watermarklab.config import WatermarkerConfig

METRIC_NAMES = ("bitacc", "detectacc", "psnr", "ssim", "perceptual", "frechet", "dispersal")
DEFAULT_ATTACKS = ("no-attack", "demark", "brightness", "contrast", "gaussian-blur", "gaussian-noise", "jpeg")

WATERMARKER_CHECKPOINT_NAME = "watermarker.ckpt"
ATTACK_MODEL_CHECKPOINT_NAME = "attack_model.ckpt"


class DetectionMode(str, Enum):
    """How DetectAcc thresholds are calibrated."""

    ANALYTIC = "analytic"
    EMPIRICAL = "empirical"


class DispersalMode(str, Enum):
    """Which latent the sparse attack latent is compared against."""

    PAIRED_ALPHA = "paired-alpha"
    WHITEBOX_PROBE = "whitebox-probe"


@dataclass(frozen=True)
class DispersalSettings:
    """Settings of the dispersal study."""

    mode: DispersalMode = DispersalMode.PAIRED_ALPHA
    """The default study mode."""

    reference_checkpoint: str | None = None
    """Attack model trained with alpha = 0. Trained on the fly when absent."""

    sparse_checkpoint: str | None = None
    """Attack model trained with alpha > 0. Defaults to the experiment's attack model."""

    histogram_alphas: tuple[float, ...] = ()
    """Further alphas trained on the fly and added to the SLR histogram."""

    count: int | None = None
    """Number of test images studied. Defaults to the whole test set."""

    def __post_init__(self: DispersalSettings) -> None:
        object.__setattr__(self, "mode", DispersalMode(self.mode))
        object.__setattr__(self, "histogram_alphas", tuple(float(a) for a in self.histogram_alphas))


@dataclass(frozen=True)
class AblationSettings:
    """Settings of the sparsity / loss-variant ablation grid."""

    alphas: tuple[float, ...] = (0.0, 10.0, 20.0)
    """Sparsity weights of the grid."""

    variants: tuple[SPLVariant, ...] = (SPLVariant.FULL,)
    """Structural-perceptual variants of the grid."""

    def __post_init__(self: AblationSettings) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "variants", tuple(SPLVariant(v) for v in self.variants))


@dataclass(frozen=True)
class FinetuneSettings:
    """Settings of the detector fine-tuning experiment."""

    epochs: int = 5
    """Fine-tuning epochs."""

    train_fraction: float = 0.5
    """Share of the test images used for fine-tuning. The rest is held out."""

    clean_replay: bool = True
    """Whether unattacked watermarked images are mixed into fine-tuning."""

    def __post_init__(self: FinetuneSettings) -> None:
        if self.epochs < 0:
            raise ConfigError(f"Fine-tuning epochs must be non-negative, got {self.epochs}.")

        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"The fine-tuning train fraction must lie in (0, 1), got {self.train_fraction}.")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs: data, components, attacks, metrics and outputs."""

    dataset: DatasetSpec | None = None
    """Training images of the watermarker and the attack model."""

    test_dataset: DatasetSpec | None = None
    """Held-out evaluation images. Defaults to the training dataset."""

    watermarker: WatermarkerConfig | None = None
    """Configuration to train the reference scheme with, when no checkpoint exists."""

    watermarker_checkpoint: str | None = None
    """Path of a trained reference scheme."""

    attack_model: AttackModelConfig | None = None
    """Configuration to train the attack model with, when no checkpoint exists."""

    attack_model_checkpoint: str | None = None
    """Path of a trained attack model."""

    scheme: str = "reference"
    """Name of the watermarking scheme under attack."""

    attacks: tuple[str, ...] = DEFAULT_ATTACKS
    """Names of the evaluated attacks."""

    attack_entries: tuple[dict[str, Any], ...] = ()
    """Extra named distortions, as {"name", "kind", "strength", "seed"}."""

    attack_strengths: dict[str, float] = field(default_factory=dict)
    """Overrides of the default distortion strengths, by kind."""

    metrics: tuple[str, ...] = ("bitacc", "detectacc", "psnr", "ssim", "perceptual")
    """Reported metrics."""

    fpr: float = DEFAULT_FPR
    """False positive rate of DetectAcc."""

    tau: float = DEFAULT_TAU
    """Significance threshold of the dispersal metrics."""

    detection_mode: DetectionMode = DetectionMode.ANALYTIC
    """Binomial null threshold, or empirical calibration on unwatermarked test images."""

    output_dir: str = "output"
    """Directory receiving checkpoints, reports and plots."""

    seed: int = 0
    """Seed of messages and noise."""

    budget_minutes: float = 60.0
    """Wall-clock cap of the ablation grid."""

    embedder_seed: int = 0
    """Seed of the feature embedder of the perceptual and Fréchet metrics."""

    dispersal: DispersalSettings = field(default_factory=DispersalSettings)
    """Dispersal study settings."""

    ablation: AblationSettings = field(default_factory=AblationSettings)
    """Ablation grid settings."""

    finetune: FinetuneSettings = field(default_factory=FinetuneSettings)
    """Detector fine-tuning settings."""

    def __post_init__(self: ExperimentConfig) -> None:
        object.__setattr__(self, "attacks", tuple(self.attacks))
        object.__setattr__(self, "attack_entries", tuple(self.attack_entries))
        object.__setattr__(self, "metrics", tuple(self.metrics))

        try:
            object.__setattr__(self, "detection_mode", DetectionMode(self.detection_mode))
        except ValueError as e:
            raise ConfigError(f"Unknown detection mode {self.detection_mode!r}.") from e

        if not 0.0 < self.fpr < 1.0:
            raise ConfigError(f"The false positive rate must lie in (0, 1), got {self.fpr}.")

        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigError(f"tau must be positive, got {self.tau}.")

        if not self.budget_minutes > 0:
            raise ConfigError(f"The time budget must be positive, got {self.budget_minutes}.")

        unknown = [name for name in self.metrics if name not in METRIC_NAMES]
        if unknown:
            raise ConfigError(f"Unknown metrics {unknown}; available: {list(METRIC_NAMES)}.")

        if len(set(self.attacks)) != len(self.attacks):
            raise ConfigError(f"Attack names must be unique, got {list(self.attacks)}.")

        output_dir = Path(self.output_dir)
        if output_dir.exists() and not output_dir.is_dir():
            raise ConfigError(f"Output directory {output_dir} is not a directory.")

    @property
    def evaluation_dataset(self: ExperimentConfig) -> DatasetSpec:
        """Returns the held-out dataset, falling back to the training dataset."""
        spec = self.test_dataset or self.dataset

        if spec is None:
            raise ConfigError("The experiment names no dataset.")

        return spec

    @property
    def training_dataset(self: ExperimentConfig) -> DatasetSpec:
        """Returns the training dataset."""
        if self.dataset is None:
            raise ConfigError("The experiment names no training dataset.")

        return self.dataset

    @property
    def watermarker_path(self: ExperimentConfig) -> Path:
        """Returns where the reference scheme checkpoint is read from and written to."""
        return Path(self.watermarker_checkpoint or Path(self.output_dir) / WATERMARKER_CHECKPOINT_NAME)

    @property
    def attack_model_path(self: ExperimentConfig) -> Path:
        """Returns where the attack model checkpoint is read from and written to."""
        return Path(self.attack_model_checkpoint or Path(self.output_dir) / ATTACK_MODEL_CHECKPOINT_NAME)

    @property
    def config_hash(self: ExperimentConfig) -> str:
        """Returns the provenance hash. The output directory does not take part in it."""
        payload = self.to_dict()
        del payload["output_dir"]
        return stable_hash(payload)

    def with_overrides(self: ExperimentConfig, seed: int | None = None, output_dir: str | None = None) -> ExperimentConfig:
        """Returns a copy with the command-line overrides applied."""
        changes: dict[str, Any] = {}

        if seed is not None:
            changes["seed"] = seed

        if output_dir is not None:
            changes["output_dir"] = output_dir

        return replace(self, **changes)

    def to_dict(self: ExperimentConfig) -> dict[str, Any]:
        """Returns the JSON form of the configuration."""
        return {
            "dataset": self.dataset.to_dict() if self.dataset else None,
            "test_dataset": self.test_dataset.to_dict() if self.test_dataset else None,
            "watermarker": self.watermarker.to_dict() if self.watermarker else None,
            "watermarker_checkpoint": self.watermarker_checkpoint,
            "attack_model": self.attack_model.to_dict() if self.attack_model else None,
            "attack_model_checkpoint": self.attack_model_checkpoint,
            "scheme": self.scheme,
            "attacks": list(self.attacks),
            "attack_entries": [dict(entry) for entry in self.attack_entries],
            "attack_strengths": dict(self.attack_strengths),
            "metrics": list(self.metrics),
            "fpr": self.fpr,
            "tau": self.tau,
            "detection_mode": self.detection_mode.value,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "budget_minutes": self.budget_minutes,
            "embedder_seed": self.embedder_seed,
            "dispersal": {
                "mode": self.dispersal.mode.value,
                "reference_checkpoint": self.dispersal.reference_checkpoint,
                "sparse_checkpoint": self.dispersal.sparse_checkpoint,
                "histogram_alphas": list(self.dispersal.histogram_alphas),
                "count": self.dispersal.count,
            },
            "ablation": {
                "alphas": list(self.ablation.alphas),
                "variants": [v.value for v in self.ablation.variants],
            },
            "finetune": {
                "epochs": self.finetune.epochs,
                "train_fraction": self.finetune.train_fraction,
                "clean_replay": self.finetune.clean_replay,
            },
        }

    @classmethod
    def from_dict(cls: type[ExperimentConfig], payload: dict[str, Any]) -> ExperimentConfig:
        """Builds a configuration from its JSON form. Missing keys take their defaults."""
        if not isinstance(payload, dict):
            raise ConfigError("An experiment configuration must be a JSON object.")

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"Unknown experiment configuration keys {unknown}.")

        values = dict(payload)

        try:
            for key in ("dataset", "test_dataset"):
                if values.get(key) is not None:
                    values[key] = DatasetSpec.from_dict(values[key])

            if values.get("watermarker") is not None:
                values["watermarker"] = WatermarkerConfig.from_dict(values["watermarker"])

            if values.get("attack_model") is not None:
                values["attack_model"] = AttackModelConfig.from_dict(values["attack_model"])

            values["dispersal"] = DispersalSettings(**(values.get("dispersal") or {}))
            values["ablation"] = AblationSettings(**(values.get("ablation") or {}))
            values["finetune"] = FinetuneSettings(**(values.get("finetune") or {}))

            # null falls back to the default
            return cls(**{key: value for key, value in values.items() if value is not None})
        except ConfigError:
            raise
        except (DatasetSpecError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid experiment configuration: {e}") from e


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Reads an experiment configuration from a JSON file.

    Args:
        path (str | Path): The JSON file.

    Returns:
        ExperimentConfig: The validated configuration.
    """
    path = Path(path)

    if not path.is_file():
        raise ConfigError(f"Configuration file {path} does not exist.")

    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration file {path} is not valid JSON: {e}") from e

    return ExperimentConfig.from_dict(payload)


def save_experiment_config(config: ExperimentConfig, path: str | Path) -> None:
    """Writes an experiment configuration as JSON."""
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
