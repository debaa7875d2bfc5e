#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

import ast
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import libdemark
from libdemark.demark.config import AttackModelConfig
from libdemark.harness.ablation import ABLATION_COLUMNS, ABLATION_CSV, run_ablation
from libdemark.harness.cli import EXIT_CONFIG_ERROR, EXIT_OK, cli_main
from libdemark.harness.components import obtain_attack_model
from libdemark.harness.dispersal_study import DISPERSAL_JSON, SLR_HISTOGRAM, compare_latents, run_dispersal_study
from libdemark.harness.evaluation import run_evaluation
from libdemark.harness.experiment_config import (
    DispersalSettings,
    ExperimentConfig,
    load_experiment_config,
    save_experiment_config,
)
from libdemark.harness.finetune import FINETUNE_JSON, run_finetune
from libdemark.harness.reports import COST_JSON, REPORT_CSV, REPORT_JSON, ROW_COLUMNS
from libdemark.imagekit.dataset import DatasetSpec
from libdemark.imagekit.image_io import load_image, save_image
from libdemark.imagekit.synthetic import synth_image
from libdemark.metrics.latent import BitMessage, Latent
from libdemark.metrics.quality import PSNR_CAP_DB
from libdemark.utils.exceptions import BudgetExceededError, ConfigError, RegistryError
from libdemark.watermarklab.config import WatermarkerConfig
from libdemark.watermarklab.scheme_registry import register_external_scheme, unregister_external_scheme

ATTACKS = ("no-attack", "demark", "jpeg")


def _experiment(output_dir, **changes):
    cfg = ExperimentConfig(
        dataset=DatasetSpec("synthetic", 41, target_size=(16, 16), count_limit=6),
        test_dataset=DatasetSpec("synthetic", 42, target_size=(16, 16), count_limit=4),
        watermarker=WatermarkerConfig(message_length=16, channels=8, epochs=1, batch_size=4, seed=1),
        attack_model=AttackModelConfig(channels=(4, 8, 8, 8), attention_reduction=2, epochs=1, batch_size=4, seed=2),
        attacks=ATTACKS,
        metrics=("bitacc", "detectacc", "psnr", "ssim"),
        fpr=0.01,
        output_dir=str(output_dir),
        seed=3,
    )
    return replace(cfg, **changes)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(fpr=0.0)

    with pytest.raises(ConfigError):
        ExperimentConfig(metrics=("bitacc", "accuracy"))

    with pytest.raises(ConfigError):
        ExperimentConfig(attacks=("jpeg", "jpeg"))

    with pytest.raises(ConfigError):
        ExperimentConfig(detection_mode="oracle")

    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"seeds": 3})

    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"dataset": {"source": "synthetic", "location": 1}})

    with pytest.raises(ConfigError):
        ExperimentConfig().evaluation_dataset


def test_config_json_round_trip(tmp_path):
    cfg = _experiment(tmp_path / "out", dispersal=DispersalSettings(mode="whitebox-probe", count=2))
    path = tmp_path / "experiment.json"
    save_experiment_config(cfg, path)

    restored = load_experiment_config(path)

    assert restored == cfg
    assert restored.config_hash == cfg.config_hash
    assert replace(cfg, output_dir="elsewhere").config_hash == cfg.config_hash
    assert replace(cfg, seed=4).config_hash != cfg.config_hash

    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "missing.json")

    (tmp_path / "broken.json").write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "broken.json")


def test_unknown_attack_is_rejected_before_anything_runs(tmp_path):
    cfg = _experiment(tmp_path / "out", attacks=("no-attack", "sharpen"))

    with pytest.raises(RegistryError):
        run_evaluation(cfg)

    assert not (tmp_path / "out").exists()


def test_evaluation_end_to_end(tmp_path):
    output_dir = tmp_path / "out"
    cfg = _experiment(output_dir)

    report = run_evaluation(cfg)

    assert list(report.summaries) == list(ATTACKS)
    assert (output_dir / REPORT_JSON).is_file()
    assert (output_dir / "watermarker.ckpt").is_file()
    assert (output_dir / "attack_model.ckpt").is_file()

    table = pd.read_csv(output_dir / REPORT_CSV)
    assert list(table.columns) == list(ROW_COLUMNS)
    assert len(table) == 4 * len(ATTACKS)
    assert table["bitacc"].between(0.0, 1.0).all()

    untouched = report.rows_of("no-attack")
    assert all(row.psnr == PSNR_CAP_DB for row in untouched)
    assert all(row.ssim == pytest.approx(1.0) for row in untouched)

    for name, summary in report.summaries.items():
        assert summary.bitacc_mean == pytest.approx(np.mean([row.bitacc for row in report.rows_of(name)]))

    first = (output_dir / REPORT_JSON).read_bytes()
    first_rows = (output_dir / REPORT_CSV).read_bytes()
    payload = json.loads(first)
    assert payload["provenance"]["config_hash"] == cfg.config_hash
    assert payload["provenance"]["detection_threshold"] is not None
    assert "cost" not in payload

    cost = json.loads((output_dir / COST_JSON).read_text(encoding="utf-8"))
    assert cost["attack_model_bytes"] > 0
    assert set(cost["seconds_per_image"]) == set(ATTACKS)

    # Same configuration and seed, checkpoints reused from the first run
    again = run_evaluation(cfg)

    assert again.to_dict() == report.to_dict()
    assert (output_dir / REPORT_JSON).read_bytes() == first
    assert (output_dir / REPORT_CSV).read_bytes() == first_rows


def test_identity_external_scheme_embeds_nothing(tmp_path):
    register_external_scheme("identity-eval", lambda x, m: x, lambda x: BitMessage(np.zeros(16, dtype=np.uint8)), 16)

    try:
        cfg = _experiment(tmp_path / "out", scheme="identity-eval", attacks=("no-attack", "jpeg"), watermarker=None)
        report = run_evaluation(cfg)
    finally:
        unregister_external_scheme("identity-eval")

    assert 0.2 <= report.summaries["no-attack"].bitacc_mean <= 0.8
    assert report.provenance["scheme_type"] == "external"
    assert not (tmp_path / "out" / "watermarker.ckpt").exists()


def test_dispersal_of_identical_models_is_zero(tmp_path):
    output_dir = tmp_path / "out"
    cfg = _experiment(output_dir)
    checkpoint = output_dir / "attack_model.ckpt"

    cfg = replace(
        cfg,
        dispersal=DispersalSettings(reference_checkpoint=str(checkpoint), sparse_checkpoint=str(checkpoint)),
    )
    obtain_attack_model(cfg)

    study = run_dispersal_study(cfg, "paired-alpha")

    assert len(study.reports) == 4
    assert all(report.sc == 0.0 and report.ir == 0.0 for report in study.reports)
    assert all(np.isnan(report.pr) or report.pr == 0.0 for report in study.reports)
    assert (output_dir / DISPERSAL_JSON).is_file()
    assert (output_dir / SLR_HISTOGRAM).is_file()


def test_compare_latents_marks_degenerate_support():
    report = compare_latents(Latent.from_array(np.zeros(8)), Latent.from_array(np.ones(8)), 0.02)

    assert np.isnan(report.pr)
    assert report.sc == pytest.approx(-1.0)


def test_ablation_needs_two_cells(tmp_path):
    cfg = _experiment(tmp_path / "out")

    with pytest.raises(ConfigError):
        run_ablation(cfg, alphas=[10.0], variants=["full"])

    with pytest.raises(ConfigError):
        run_ablation(cfg, alphas=[10.0, 10.0], variants=["full"])


def test_ablation_budget_keeps_completed_cells(tmp_path):
    output_dir = tmp_path / "out"
    cfg = _experiment(output_dir, budget_minutes=1e-9)

    with pytest.raises(BudgetExceededError) as info:
        run_ablation(cfg, alphas=[0.0, 10.0], variants=["full"])

    partial = info.value.partial
    assert isinstance(partial, pd.DataFrame)
    assert list(partial.columns) == list(ABLATION_COLUMNS)
    assert len(partial) == 0
    assert (output_dir / ABLATION_CSV).is_file()


def test_ablation_grid(tmp_path):
    output_dir = tmp_path / "out"
    cfg = _experiment(output_dir)

    table = run_ablation(cfg, alphas=[0.0, 10.0], variants=["full"])

    assert list(table["alpha"]) == [0.0, 10.0]
    assert list(table["variant"]) == ["full", "full"]
    assert table["bitacc"].between(0.0, 1.0).all()
    assert len(pd.read_csv(output_dir / ABLATION_CSV)) == 2


def test_finetune_detector(tmp_path):
    output_dir = tmp_path / "out"
    cfg = _experiment(output_dir)

    outcome = run_finetune(cfg)

    assert outcome.train_count == 2 and outcome.heldout_count == 2
    assert 0.0 <= outcome.attacked_after <= 1.0
    assert (output_dir / FINETUNE_JSON).is_file()

    with pytest.raises(ConfigError):
        run_finetune(replace(cfg, scheme="somebody-else"))


def test_cli_help_and_missing_config(tmp_path, capsys):
    assert cli_main(["--help"]) == EXIT_OK
    assert cli_main(["--version"]) == EXIT_OK
    assert cli_main(["eval", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG_ERROR
    assert "missing.json" in capsys.readouterr().err
    assert cli_main(["frobnicate"]) == EXIT_CONFIG_ERROR


def test_cli_distort(tmp_path):
    source = tmp_path / "in.png"
    target = tmp_path / "out.png"
    save_image(synth_image(5, 0, (16, 16)), source)

    args = ["distort", "--input", str(source), "--output", str(target), "--kind", "brightness", "--strength", "1.2"]
    assert cli_main([*args, "--output-dir", str(tmp_path)]) == EXIT_OK
    assert load_image(target).shape == (16, 16, 3)

    bad = ["distort", "--input", str(source), "--output", str(target), "--kind", "jpeg", "--strength", "0"]
    assert cli_main([*bad, "--output-dir", str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_cli_train_attack_then_attack(tmp_path):
    config_path = tmp_path / "experiment.json"
    save_experiment_config(_experiment(tmp_path / "out"), config_path)

    source = tmp_path / "in.png"
    target = tmp_path / "attacked.png"
    save_image(synth_image(6, 0, (16, 16)), source)

    attack = ["attack", "--config", str(config_path), "--input", str(source), "--output", str(target)]

    # No checkpoint yet and attack never trains
    assert cli_main(attack) == EXIT_CONFIG_ERROR

    assert cli_main(["train-attack", "--config", str(config_path)]) == EXIT_OK
    assert cli_main(attack) == EXIT_OK
    assert load_image(target).shape == (16, 16, 3)


def _imported_modules(package_dir):
    for path in Path(package_dir).rglob("*.py"):
        for node in ast.walk(ast.parse(path.read_text(encoding="utf-8"))):
            if isinstance(node, ast.ImportFrom) and node.module:
                yield path, node.module
            elif isinstance(node, ast.Import):
                for alias in node.names:
                    yield path, alias.name


@pytest.mark.parametrize("package", ["demark", "attacks"])
def test_attack_side_never_imports_the_watermarker(package):
    package_dir = Path(libdemark.__file__).parent / package

    offending = [(path.name, module) for path, module in _imported_modules(package_dir) if "watermarklab" in module]

    assert offending == []
