#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

import numpy as np
import pytest
import torch

from libdemark.demark.attack_model import AttackModel
from libdemark.demark.config import AttackModelConfig
from libdemark.imagekit.image_tensor import stack_images
from libdemark.imagekit.synthetic import synth_dataset
from libdemark.metrics.latent import BitMessage
from libdemark.utils.exceptions import CheckpointError, ConfigError, MetricDomainError, RegistryError
from libdemark.watermarklab.config import NOISE_LAYER_NAMES, WatermarkerConfig
from libdemark.watermarklab.noise_layers import apply_noise_layer
from libdemark.watermarklab.scheme import ExternalScheme, ReferenceScheme
from libdemark.watermarklab.scheme_registry import (
    register_external_scheme,
    registered_schemes,
    resolve_scheme,
    unregister_external_scheme,
)
from libdemark.watermarklab.trainer import adversarial_finetune, train_watermarker
from libdemark.watermarklab.watermarker import Watermarker

TINY = WatermarkerConfig(message_length=8, channels=8, epochs=1, batch_size=4, seed=3)


@pytest.fixture(scope="module")
def images():
    return synth_dataset(seed=21, count=8, size=(16, 16))


@pytest.fixture(scope="module")
def trained(images):
    return train_watermarker(images, TINY)


def _messages(count, length=8, seed=0):
    rng = np.random.default_rng(seed)
    return [BitMessage.random(length, rng) for _ in range(count)]


def test_untrained_embedder_leaves_images_unchanged(images):
    watermarker = Watermarker(TINY)
    m = _messages(1)[0]

    assert watermarker.embed(images[0], m) == images[0]


def test_detect_shapes(images):
    watermarker = Watermarker(TINY)
    bits, logits = watermarker.detect(images[0])

    assert len(bits) == TINY.message_length
    assert logits.shape == (TINY.message_length,)
    assert logits.dtype == np.float64
    assert np.array_equal(bits.bits, (logits > 0).astype(np.uint8))

    assert watermarker.detect_logits(images[:3]).shape == (3, TINY.message_length)


def test_message_length_is_checked(images):
    watermarker = Watermarker(TINY)

    with pytest.raises(MetricDomainError):
        watermarker.embed(images[0], _messages(1, length=9)[0])

    with pytest.raises(MetricDomainError):
        watermarker.embed_batch(images[:2], _messages(1))


def test_config_validation():
    with pytest.raises(ConfigError):
        WatermarkerConfig(message_length=4)

    with pytest.raises(ConfigError):
        WatermarkerConfig(embed_strength=0.0)

    with pytest.raises(ConfigError):
        WatermarkerConfig(epochs=0)

    with pytest.raises(ConfigError):
        WatermarkerConfig(noise_layers=("salt",))

    config = WatermarkerConfig(noise_layers=NOISE_LAYER_NAMES, sparse_mode=True)
    assert WatermarkerConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize("name", NOISE_LAYER_NAMES)
def test_noise_layers_keep_shape_and_range(name, images):
    x = stack_images(images[:2])
    y = apply_noise_layer(name, x, torch.Generator().manual_seed(0))

    assert y.shape == x.shape
    assert y.min().item() >= -1e-6 and y.max().item() <= 1.0 + 1e-6


def test_unknown_noise_layer():
    with pytest.raises(ConfigError):
        apply_noise_layer("salt", torch.zeros(1, 3, 8, 8), torch.Generator())


def test_training_records_the_loss(trained):
    assert len(trained.training_log) == TINY.epochs
    assert all(np.isfinite(trained.training_log))
    assert not trained.training


def test_checkpoint_round_trip(trained, images, tmp_path):
    path = tmp_path / "watermarker.ckpt"
    trained.save(path)

    restored = Watermarker.load(path)
    m = _messages(1)[0]

    assert restored.config == trained.config
    assert restored.embed(images[0], m) == trained.embed(images[0], m)
    assert np.array_equal(restored.detect(images[1])[1], trained.detect(images[1])[1])


def test_loading_the_wrong_kind_is_rejected(tmp_path):
    path = tmp_path / "attack.ckpt"
    AttackModel(AttackModelConfig(channels=(4, 8, 8, 8), attention_reduction=2)).save(path)

    with pytest.raises(CheckpointError):
        Watermarker.load(path)


def test_zero_epoch_finetune_is_an_unchanged_copy(trained, images):
    pairs = list(zip(images[:4], _messages(4)))
    tuned = adversarial_finetune(trained, pairs, epochs=0)

    assert tuned is not trained
    assert all(torch.equal(a, b) for a, b in zip(trained.parameters(), tuned.parameters()))


def test_finetune_only_trains_the_detector(trained, images):
    pairs = list(zip(images[:4], _messages(4)))
    before = [p.detach().clone() for p in trained.detector.parameters()]

    tuned = adversarial_finetune(trained, pairs, epochs=2, clean_pairs=pairs[:2])

    assert all(torch.equal(a, b) for a, b in zip(trained.embedder.parameters(), tuned.embedder.parameters()))
    assert all(
        torch.equal(a, b) for a, b in zip(trained.discriminator.parameters(), tuned.discriminator.parameters())
    )
    assert any(not torch.equal(a, b) for a, b in zip(before, tuned.detector.parameters()))
    assert all(torch.equal(a, b) for a, b in zip(before, trained.detector.parameters()))


def test_finetune_errors(trained, images):
    with pytest.raises(MetricDomainError):
        adversarial_finetune(trained, [], epochs=1)

    with pytest.raises(MetricDomainError):
        adversarial_finetune(trained, [(images[0], _messages(1)[0])], epochs=-1)


def test_reference_scheme_wraps_the_watermarker(trained, images):
    scheme = resolve_scheme("reference", trained)

    assert isinstance(scheme, ReferenceScheme)
    assert scheme.message_length == TINY.message_length
    assert scheme.scheme_type == "residual"

    with pytest.raises(ConfigError):
        resolve_scheme("reference")


def test_external_scheme_registry(images):
    def embed(x, m):
        return x

    def detect(x):
        return BitMessage(np.ones(8, dtype=np.uint8))

    register_external_scheme("identity", embed, detect, 8)

    try:
        assert "identity" in registered_schemes()

        scheme = resolve_scheme("identity")
        assert isinstance(scheme, ExternalScheme)
        assert scheme.embed(images[0], _messages(1)[0]) == images[0]

        bits, logits = scheme.detect(images[0])
        assert np.array_equal(logits, np.ones(8))
        assert len(bits) == 8

        with pytest.raises(MetricDomainError):
            scheme.embed(images[0], _messages(1, length=10)[0])

        with pytest.raises(RegistryError):
            register_external_scheme("identity", embed, detect, 8)
    finally:
        unregister_external_scheme("identity")

    assert "identity" not in registered_schemes()

    with pytest.raises(RegistryError):
        resolve_scheme("identity")

    with pytest.raises(RegistryError):
        register_external_scheme("reference", embed, detect, 8)

    with pytest.raises(ConfigError):
        register_external_scheme("short", embed, detect, 4)

    with pytest.raises(RegistryError):
        unregister_external_scheme("short")
