#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

import time

import numpy as np
import pytest
import torch

from libdemark.demark import trainer as demark_trainer
from libdemark.demark.attack_model import AttackModel
from libdemark.demark.channel_attention import ChannelAttention
from libdemark.demark.config import AttackModelConfig
from libdemark.demark.trainer import train_attack
from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.imagekit.synthetic import synth_dataset
from libdemark.losses.objectives import SPLVariant
from libdemark.metrics.latent import Latent
from libdemark.utils.checkpoint import load_checkpoint
from libdemark.utils.exceptions import (
    BudgetExceededError,
    CheckpointError,
    ConfigError,
    EmptyDatasetError,
    ModelShapeError,
    TrainingFailureError,
)

TINY = AttackModelConfig(channels=(4, 8, 8, 8), attention_reduction=2, epochs=2, batch_size=4, seed=5)


@pytest.fixture(scope="module")
def images():
    return synth_dataset(seed=11, count=8, size=(16, 16))


def test_zeroed_attention_is_the_identity():
    attention = ChannelAttention(6, reduction=2)
    for parameter in attention.parameters():
        torch.nn.init.zeros_(parameter)

    x = torch.randn(2, 6, 5, 5, generator=torch.Generator().manual_seed(0))

    assert torch.equal(attention(x), x)


def test_attention_with_unit_fc():
    attention = ChannelAttention(1, reduction=1)
    with torch.no_grad():
        for layer in (attention.fc[0], attention.fc[2]):
            layer.weight.fill_(1.0)
            layer.bias.zero_()

    out = attention(torch.full((1, 1, 1, 1), 2.0))

    assert out.item() == pytest.approx(3.523, abs=1e-3)


def test_saturated_attention_suppresses_features():
    attention = ChannelAttention(2, reduction=1)
    with torch.no_grad():
        attention.fc[0].weight.zero_()
        attention.fc[0].bias.zero_()
        attention.fc[2].weight.zero_()
        attention.fc[2].bias.fill_(-50.0)

    out = attention(torch.ones(1, 2, 3, 3))

    assert out.abs().max().item() < 1e-20


def test_attention_rejects_channel_mismatch():
    with pytest.raises(ModelShapeError):
        ChannelAttention(4)(torch.zeros(1, 3, 4, 4))


def test_default_shapes():
    model = AttackModel(AttackModelConfig())
    x = ImageTensor(np.random.default_rng(0).uniform(size=(64, 64, 3)))

    Z = model.encode(x)
    assert Z.shape == (128, 16, 16)

    x_tilde = model.reconstruct(Z)
    assert x_tilde.shape == (64, 64, 3)
    assert x_tilde.data.min() >= 0.0 and x_tilde.data.max() <= 1.0


def test_reconstructor_upsamples_instead_of_transposing():
    layers = list(AttackModel(TINY).reconstructor.modules())

    assert any(isinstance(layer, torch.nn.Upsample) for layer in layers)
    assert not any(isinstance(layer, torch.nn.ConvTranspose2d) for layer in layers)


def test_encode_and_attack_are_deterministic(images):
    model = AttackModel(TINY)

    assert np.array_equal(model.encode(images[0]).data, model.encode(images[0]).data)
    assert model.attack(images[0]) == model.attack(images[0])
    assert model.attack(images[0]).shape == images[0].shape


def test_batched_and_single_attacks_agree(images):
    model = AttackModel(TINY)
    batched = model.attack_batch(images[:3])

    for x, y in zip(images[:3], batched):
        assert np.allclose(model.attack(x).data, y.data, atol=1e-6)

    for latent, x in zip(model.encode_batch(images[:3]), images[:3]):
        assert np.allclose(latent.data, model.encode(x).data, atol=1e-6)


def test_zero_parameters_give_a_zero_latent(images):
    model = AttackModel(TINY)
    with torch.no_grad():
        for parameter in model.encoder.parameters():
            parameter.zero_()

    assert np.count_nonzero(model.encode(images[0]).data) == 0


def test_same_seed_same_initialization():
    first = AttackModel(TINY)
    second = AttackModel(TINY)

    assert all(torch.equal(a, b) for a, b in zip(first.parameters(), second.parameters()))


def test_shape_errors(images):
    model = AttackModel(TINY)

    with pytest.raises(ModelShapeError):
        model.encode(ImageTensor(np.zeros((18, 18, 3))))

    with pytest.raises(ModelShapeError):
        model.reconstruct(Latent.from_array(np.zeros((3, 4, 4))))

    with pytest.raises(ModelShapeError):
        model.reconstruct(Latent.from_array(np.zeros(8)))


def test_config_validation():
    with pytest.raises(ConfigError):
        AttackModelConfig(channels=(4, 8, 8))

    with pytest.raises(ConfigError):
        AttackModelConfig(kernel_size=4)

    with pytest.raises(ConfigError):
        AttackModelConfig(strides=(2, 3, 1, 1))

    with pytest.raises(ConfigError):
        AttackModelConfig(learning_rate=0.0)

    with pytest.raises(ConfigError):
        AttackModelConfig(spl_variant="mse-only")

    with pytest.raises(ConfigError):
        AttackModelConfig.from_dict({"chanels": [1, 2, 3, 4]})


def test_config_round_trips_through_json():
    config = AttackModelConfig(weights={"alpha": 20.0, "beta": 0.1}, spl_variant="ssim-only")

    assert config.spl_variant == SPLVariant.SSIM_ONLY
    assert AttackModelConfig.from_dict(config.to_dict()) == config
    assert AttackModelConfig.from_dict(config.to_dict()).config_hash == config.config_hash
    assert config.downsample_factor == 4


def test_training_is_reproducible(images):
    first = train_attack(images, TINY)
    second = train_attack(images, TINY)

    assert len(first.training_log) == TINY.epochs
    assert first.training_log == pytest.approx(second.training_log, abs=1e-6)
    assert all(torch.allclose(a, b, atol=1e-6) for a, b in zip(first.parameters(), second.parameters()))
    assert not first.training


def test_training_reduces_the_loss():
    data = synth_dataset(seed=12, count=32, size=(16, 16))
    config = AttackModelConfig(channels=(8, 16, 16, 16), attention_reduction=4, epochs=6, batch_size=8, seed=1)

    model = train_attack(data, config)

    assert model.training_log[-1] < model.training_log[0]


def test_training_errors(images, monkeypatch):
    with pytest.raises(EmptyDatasetError):
        train_attack([], TINY)

    with pytest.raises(ModelShapeError):
        train_attack([ImageTensor(np.zeros((18, 18, 3)))], TINY)

    monkeypatch.setattr(demark_trainer, "l_sel", lambda z: z.abs().mean() * float("nan"))

    with pytest.raises(TrainingFailureError):
        train_attack(images, TINY)


def test_expired_deadline_keeps_the_partial_model(images):
    with pytest.raises(BudgetExceededError) as info:
        train_attack(images, TINY, deadline=time.monotonic() - 1.0)

    assert isinstance(info.value.partial, AttackModel)
    assert len(info.value.partial.training_log) == 1


def test_checkpoint_round_trip(images, tmp_path):
    model = train_attack(images, TINY)
    path = tmp_path / "attack.ckpt"
    model.save(path)

    restored = AttackModel.load(path)

    assert restored.config == model.config
    assert restored.training_log == pytest.approx(model.training_log)
    assert all(torch.equal(a, b) for a, b in zip(model.parameters(), restored.parameters()))
    assert restored.attack(images[0]) == model.attack(images[0])

    checkpoint = load_checkpoint(path)
    assert checkpoint.kind == "attack_model"
    assert checkpoint.epochs == TINY.epochs
    assert checkpoint.config_hash == TINY.config_hash


def test_corrupt_checkpoints_are_rejected(tmp_path):
    garbage = tmp_path / "garbage.ckpt"
    garbage.write_bytes(b"definitely not a checkpoint")

    with pytest.raises(CheckpointError):
        AttackModel.load(garbage)

    with pytest.raises(CheckpointError):
        AttackModel.load(tmp_path / "missing.ckpt")

    path = tmp_path / "attack.ckpt"
    AttackModel(TINY).save(path)
    content = path.read_bytes()
    path.write_bytes(content.replace(b'"seed": 5', b'"seed": 6', 1))

    with pytest.raises(CheckpointError):
        AttackModel.load(path)
