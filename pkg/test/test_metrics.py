#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from libdemark.imagekit.image_tensor import ImageTensor
from libdemark.losses.embedder_provider import embedder_provider
from libdemark.metrics.detection import (
    attack_success_rate,
    bit_accuracy,
    detection_rate,
    detection_threshold,
    tpr_at_fpr,
)
from libdemark.metrics.dispersal import (
    dispersal_report,
    intensity_redistribution,
    positional_redistribution,
    slr,
    sparsity_change,
    wasserstein_1d,
)
from libdemark.metrics.latent import BitMessage, Latent
from libdemark.metrics.quality import (
    PSNR_CAP_DB,
    frechet_distance,
    frechet_feature_distance,
    perceptual_distance,
    psnr,
    ssim_index,
)
from libdemark.metrics.structural_similarity import SSIM_C1
from libdemark.utils.exceptions import DegenerateSupportError, MetricDomainError, UnachievableThresholdError

coefficients = st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=40)
bits = st.lists(st.integers(0, 1), min_size=1, max_size=64)


def _latent(values):
    return Latent.from_array(np.asarray(values, dtype=np.float64))


def _constant(value, size=16):
    return ImageTensor(np.full((size, size, 3), value))


def test_sparsity_change_examples():
    assert sparsity_change(_latent([0.5, 0, 0, 0]), _latent([0.5, 0.01, 0.3, 0]), 0.02) == pytest.approx(-0.25, abs=1e-9)
    assert sparsity_change(_latent([1, 1]), _latent([0, 0]), 0.02) == pytest.approx(1.0, abs=1e-9)

    with pytest.raises(MetricDomainError):
        sparsity_change(_latent([1]), _latent([1]), 0.0)


def test_intensity_redistribution_examples(rng):
    assert intensity_redistribution(_latent([1, 0]), _latent([1, 1])) == pytest.approx(-0.5)

    z = _latent(rng.normal(size=50))
    energy = float(np.mean(z.data**2))
    assert intensity_redistribution(_latent(2 * z.data), z) == pytest.approx(3 * energy, rel=1e-9)


def test_positional_redistribution_examples():
    assert positional_redistribution(_latent([1, 0]), _latent([0, 1]), 0.02) == pytest.approx(1.0)
    assert positional_redistribution(_latent([1, 1]), _latent([0, 1, 0]), 0.02) == pytest.approx(0.5)

    with pytest.raises(DegenerateSupportError):
        positional_redistribution(_latent([1, 0]), _latent([0, 0]), 0.02)


def test_slr_examples():
    assert slr(_latent(np.zeros(10)), 0.02) == 1.0
    assert slr(_latent([0.01, 0.5, 0.001, 0.3]), 0.02) == pytest.approx(0.5, abs=1e-9)
    assert slr(_latent([0.02, -0.02]), 0.02) == 0.0


def test_latent_rejects_empty_and_non_finite():
    with pytest.raises(MetricDomainError):
        _latent([])

    with pytest.raises(MetricDomainError):
        _latent([1.0, math.inf])


@given(coefficients)
def test_identical_latents_have_no_dispersal(values):
    Z = _latent(values)

    assert sparsity_change(Z, Z) == 0.0
    assert intensity_redistribution(Z, Z) == 0.0

    if np.any(np.abs(Z.data) > 0.02):
        assert positional_redistribution(Z, Z) == 0.0
        report = dispersal_report(Z, Z)
        assert report.to_dict()["pr"] == 0.0
        assert set(report.to_dict()) == {"sc", "ir", "pr", "slr_sparse", "slr_reference", "tau"}


@given(coefficients, st.integers(0, 39))
def test_raising_a_coefficient_never_increases_slr(values, index):
    Z = _latent(values)
    raised = np.array(Z.data)
    raised[index % raised.size] = 0.5

    assert slr(_latent(raised)) <= slr(Z)


@settings(max_examples=50)
@given(st.integers(1, 20), st.data())
def test_wasserstein_triangle_inequality(n, data):
    samples = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n)
    a, b, c = (np.array(data.draw(samples)) for _ in range(3))

    assert wasserstein_1d(a, c) <= wasserstein_1d(a, b) + wasserstein_1d(b, c) + 1e-12


def test_bit_accuracy_examples(rng):
    m = BitMessage.random(30, rng)

    assert bit_accuracy(m, m) == 1.0
    assert bit_accuracy(m, m.complement()) == 0.0

    half = np.array(m.bits)
    half[:15] = 1 - half[:15]
    assert bit_accuracy(m, BitMessage(half)) == pytest.approx(0.5, abs=1e-9)

    with pytest.raises(MetricDomainError):
        bit_accuracy(m, BitMessage.random(10, rng))


@given(bits, st.data())
def test_bit_accuracy_complement_sums_to_one(values, data):
    m = BitMessage(np.array(values))
    other = BitMessage(np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(values), max_size=len(values)))))

    assert bit_accuracy(m, other) + bit_accuracy(m, other.complement()) == pytest.approx(1.0, abs=1e-12)


def test_bit_message_parsing():
    assert str(BitMessage.from_string("0110")) == "0110"

    with pytest.raises(MetricDomainError):
        BitMessage.from_string("012")

    with pytest.raises(MetricDomainError):
        BitMessage(np.array([]))


def test_detection_threshold_examples():
    assert detection_threshold(30, 0.001) == 24
    assert detection_threshold(10, 0.001) == 10

    with pytest.raises(UnachievableThresholdError):
        detection_threshold(1, 0.001)

    with pytest.raises(MetricDomainError):
        detection_threshold(30, 1.5)


def _enumerated_threshold(length, fpr):
    outcomes = np.arange(2**length)
    matches = np.zeros(outcomes.size, dtype=np.int64)
    for bit in range(length):
        matches += (outcomes >> bit) & 1

    for k in range(length + 1):
        if np.count_nonzero(matches >= k) / outcomes.size <= fpr:
            return k

    return None


@pytest.mark.parametrize("fpr", [0.05, 0.01, 0.001])
@pytest.mark.parametrize("length", range(1, 17))
def test_detection_threshold_matches_enumeration(length, fpr):
    expected = _enumerated_threshold(length, fpr)

    if expected is None:
        with pytest.raises(UnachievableThresholdError):
            detection_threshold(length, fpr)
    else:
        assert detection_threshold(length, fpr) == expected


def test_detection_rate_counts_matches_against_threshold():
    # k = 24 for L = 30
    assert detection_rate([24 / 30, 23 / 30, 1.0, 0.5], 30, 0.001) == pytest.approx(0.5)

    with pytest.raises(MetricDomainError):
        detection_rate([], 30)


def test_tpr_at_fpr_examples(rng):
    assert tpr_at_fpr([1, 1, 1], [0, 0, 0], 0.001) == 1.0
    assert tpr_at_fpr([0.9, 0.4], [0.5, 0.3], 0.4) == pytest.approx(0.5)

    scores = rng.normal(size=1000)
    assert tpr_at_fpr(scores, scores, 0.001) <= 0.002

    with pytest.raises(MetricDomainError):
        tpr_at_fpr([], [0.1])


@pytest.mark.parametrize("fpr", [0.01, 0.001])
def test_empirical_and_analytic_thresholds_agree_on_the_null(rng, fpr):
    length = 30
    negatives = rng.binomial(length, 0.5, size=100_000) / length
    positives = rng.binomial(length, 0.5, size=100_000) / length

    empirical = tpr_at_fpr(positives, negatives, fpr)
    analytic = detection_rate(positives, length, fpr)

    assert abs(empirical - analytic) <= 0.005


def test_attack_success_rate(rng):
    messages = [BitMessage.random(16, rng) for _ in range(4)]
    recovered = messages[:2] + [m.complement() for m in messages[2:]]

    assert attack_success_rate(messages, recovered) == pytest.approx(0.5)


def test_psnr_examples(rng):
    assert psnr(_constant(0.3), _constant(0.3)) == PSNR_CAP_DB
    assert psnr(_constant(0.0), _constant(1.0)) == pytest.approx(0.0, abs=1e-12)
    assert psnr(_constant(0.0), _constant(0.5)) == pytest.approx(10 * math.log10(4), rel=1e-6)

    with pytest.raises(MetricDomainError):
        psnr(_constant(0.0, 16), _constant(0.0, 8))


def test_psnr_decreases_with_noise(rng):
    img = _constant(0.5)
    noise = rng.normal(size=img.shape)
    values = [psnr(ImageTensor(img.data + sigma * noise), img) for sigma in (0.01, 0.05, 0.1, 0.2)]

    assert values == sorted(values, reverse=True)
    assert len(set(values)) == len(values)


def test_ssim_examples(rng):
    a = ImageTensor(rng.uniform(size=(16, 16, 3)))
    b = ImageTensor(rng.uniform(size=(16, 16, 3)))

    assert ssim_index(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim_index(a, b) < 1.0
    assert ssim_index(a, b) == pytest.approx(ssim_index(b, a), abs=1e-12)

    expected = (2 * 0.16 + SSIM_C1) / (0.04 + 0.64 + SSIM_C1)
    assert ssim_index(_constant(0.2), _constant(0.8)) == pytest.approx(expected, rel=1e-6)

    with pytest.raises(MetricDomainError):
        ssim_index(_constant(0.2, 8), _constant(0.8, 8))


def test_perceptual_distance(rng):
    embedder = embedder_provider.get_embedder(0)
    a = ImageTensor(rng.uniform(size=(16, 16, 3)))

    assert perceptual_distance(a, a, embedder) == 0.0

    for _ in range(50):
        b = ImageTensor(rng.uniform(size=(16, 16, 3)))
        assert perceptual_distance(a, b, embedder) >= 0.0


def test_frechet_distance_closed_forms(rng):
    assert frechet_distance(np.zeros((5, 1)), np.ones((5, 1))) == pytest.approx(1.0, abs=1e-9)

    a = rng.normal(size=(40, 3))
    b = rng.normal(loc=0.5, size=(40, 3))

    assert frechet_distance(a, a) == pytest.approx(0.0, abs=1e-6)
    assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), abs=1e-6)

    with pytest.raises(MetricDomainError):
        frechet_distance(a[:3], b[:3])


def test_frechet_feature_distance_of_identical_sets(rng):
    embedder = embedder_provider.get_embedder(0)
    images = [ImageTensor(rng.uniform(size=(16, 16, 3))) for _ in range(40)]

    assert frechet_feature_distance(images, images, embedder) == pytest.approx(0.0, abs=1e-6)

    with pytest.raises(MetricDomainError):
        frechet_feature_distance(images[:5], images[:5], embedder)
