#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

import numpy as np
import pytest

from libdemark.attacks.attack import DeMarkAttack, FunctionAttack
from libdemark.attacks.distortion import DistortionKind, DistortionSpec, distort
from libdemark.attacks.registry import DEFAULT_STRENGTHS, attack_registry, distortion_attack_from_dict
from libdemark.demark.attack_model import AttackModel
from libdemark.demark.config import AttackModelConfig
from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.metrics.quality import psnr
from libdemark.utils.exceptions import ConfigError, MetricDomainError, RegistryError

TINY = AttackModelConfig(channels=(4, 8, 8, 8), attention_reduction=2, seed=2)


@pytest.fixture
def image(rng):
    return ImageTensor(rng.uniform(0.1, 0.9, size=(16, 16, 3)))


@pytest.mark.parametrize(
    "kind, strength",
    [
        (DistortionKind.BRIGHTNESS, 1.0),
        (DistortionKind.CONTRAST, 1.0),
        (DistortionKind.GAUSSIAN_BLUR, 0.0),
        (DistortionKind.GAUSSIAN_NOISE, 0.0),
    ],
)
def test_neutral_strengths_return_the_input(kind, strength, image):
    assert distort(image, DistortionSpec(kind, strength)) is image


@pytest.mark.parametrize("kind", list(DistortionKind))
def test_distortions_keep_shape_and_range(kind, image):
    out = distort(image, DistortionSpec(kind, DEFAULT_STRENGTHS[kind]))

    assert out.shape == image.shape
    assert out.data.min() >= 0.0 and out.data.max() <= 1.0
    assert out != image


def test_contrast_leaves_constant_images_alone():
    flat = ImageTensor(np.full((16, 16, 3), 0.4))

    assert np.allclose(distort(flat, DistortionSpec("contrast", 2.0)).data, 0.4)


def test_noise_is_seeded(image):
    spec = DistortionSpec("gaussian-noise", 0.1, seed=7)

    assert distort(image, spec) == distort(image, spec)
    assert distort(image, spec) != distort(image, DistortionSpec("gaussian-noise", 0.1, seed=8))


def test_high_quality_jpeg_of_a_constant_image():
    flat = ImageTensor(np.full((16, 16, 3), 0.5))

    assert psnr(distort(flat, DistortionSpec("jpeg", 95)), flat) >= 40.0


def test_distortion_spec_validation():
    with pytest.raises(MetricDomainError):
        DistortionSpec("sharpen", 1.0)

    with pytest.raises(MetricDomainError):
        DistortionSpec("jpeg", 0)

    with pytest.raises(MetricDomainError):
        DistortionSpec("jpeg", 50.5)

    with pytest.raises(MetricDomainError):
        DistortionSpec("gaussian-blur", -1.0)

    with pytest.raises(MetricDomainError):
        DistortionSpec("brightness", float("nan"))

    assert DistortionSpec("jpeg", 75).to_dict() == {"kind": "jpeg", "strength": 75, "seed": 0}


def test_distortion_attack_from_dict():
    attack = distortion_attack_from_dict({"name": "jpeg-30", "kind": "jpeg", "strength": 30})

    assert attack.name == "jpeg-30"
    assert attack.spec == DistortionSpec("jpeg", 30)

    with pytest.raises(ConfigError):
        distortion_attack_from_dict({"kind": "jpeg"})

    with pytest.raises(ConfigError):
        distortion_attack_from_dict({"kind": "sharpen", "strength": 1})


def test_registry_contents(image):
    registry = attack_registry(strengths={"jpeg": 30})

    assert list(registry) == ["no-attack", *(kind.value for kind in DistortionKind)]
    assert registry["no-attack"](image) is image
    assert registry["jpeg"].spec.strength == 30
    assert all(registry[name].parameter_bytes == 0 for name in registry)

    with pytest.raises(RegistryError):
        registry["sharpen"]

    with pytest.raises(RegistryError, match="trained attack model"):
        registry["demark"]

    with pytest.raises(RegistryError):
        registry.check_names(["jpeg", "sharpen"])

    with pytest.raises(RegistryError):
        attack_registry(strengths={"sharpen": 1.0})


def test_registry_extras(image):
    flip = FunctionAttack("flip", lambda x: ImageTensor(x.data[:, ::-1]))
    registry = attack_registry(extra=[flip])

    assert np.array_equal(registry["flip"](image).data, image.data[:, ::-1])
    assert registry["flip"].attack_batch([image, image])[1] == registry["flip"](image)

    with pytest.raises(RegistryError):
        attack_registry(extra=[flip, FunctionAttack("flip", lambda x: x)])


def test_demark_attack(image):
    model = AttackModel(TINY)
    registry = attack_registry(attack_model=model)
    attack = registry["demark"]

    assert isinstance(attack, DeMarkAttack)
    assert attack(image) == model.attack(image)
    assert attack.parameter_bytes == sum(p.numel() * 4 for p in model.parameters())
    assert attack.parameter_bytes > 0
