#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import Sequence

import torch
from torch import nn

from libdemark.utils.exceptions import MetricDomainError

# (in channels, out channels, stride)
DEFAULT_STAGES = ((3, 16, 1), (16, 32, 2), (32, 32, 2), (32, 32, 2))
DEFAULT_TAPS = (1, 2, 3)


class FeatureEmbedder(nn.Module):
    """A frozen, seed-deterministic convolutional feature extractor used by perceptual losses and metrics.

    Attributes:
        layers (nn.ModuleList): The convolution + tanh stages.
        taps (tuple[int, ...]): The indices of the stages whose outputs feed the perceptual distance.
        seed (int): The seed the filters were drawn with, or -1 for externally supplied stages.
    """

    def __init__(
        self: FeatureEmbedder,
        seed: int = 0,
        stages: Sequence[tuple[int, int, int]] = DEFAULT_STAGES,
        taps: Sequence[int] = DEFAULT_TAPS,
    ) -> None:
        """Draws orthogonal filters for every stage from the given seed and freezes them.

        Args:
            seed (int, optional): The seed. Equal seeds yield identical embedders. Defaults to 0.
            stages (Sequence[tuple[int, int, int]], optional): (in, out, stride) per stage. Defaults to DEFAULT_STAGES.
            taps (Sequence[int], optional): The tapped stage indices. Defaults to DEFAULT_TAPS.
        """
        super().__init__()

        layers = []

        # Keep the global RNG untouched so building an embedder never shifts training randomness
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)

            for in_channels, out_channels, stride in stages:
                conv = nn.Conv2d(in_channels, out_channels, kernel_size=3, stride=stride, padding=1)
                nn.init.orthogonal_(conv.weight)
                nn.init.zeros_(conv.bias)
                layers.append(nn.Sequential(conv, nn.Tanh()))

        self._setup(nn.ModuleList(layers), taps, [stride for _, _, stride in stages], seed)

    @classmethod
    def from_stages(
        cls: type[FeatureEmbedder],
        stages: Sequence[nn.Module],
        taps: Sequence[int],
        strides: Sequence[int],
    ) -> FeatureEmbedder:
        """Builds an embedder around externally supplied (e.g. pretrained) stages.

        Args:
            stages (Sequence[nn.Module]): The feature stages, applied in order.
            taps (Sequence[int]): The tapped stage indices.
            strides (Sequence[int]): The spatial downsampling of every stage.

        Returns:
            FeatureEmbedder: The frozen embedder.
        """
        embedder = cls.__new__(cls)
        nn.Module.__init__(embedder)
        embedder._setup(nn.ModuleList(stages), taps, strides, -1)
        return embedder

    def _setup(
        self: FeatureEmbedder,
        layers: nn.ModuleList,
        taps: Sequence[int],
        strides: Sequence[int],
        seed: int,
    ) -> None:
        taps = tuple(sorted(set(taps)))

        if len(taps) < 2:
            raise ValueError("A feature embedder needs at least two tap points.")

        if taps[0] < 0 or taps[-1] >= len(layers):
            raise ValueError(f"Tap points {taps} fall outside of {len(layers)} stages.")

        # Cumulative downsampling at every tap must differ
        scales = []
        scale = 1
        for index, stride in enumerate(strides):
            scale *= stride
            if index in taps:
                scales.append(scale)

        if len(set(scales)) != len(scales):
            raise ValueError("Tap points must sit at distinct spatial resolutions.")

        self.layers = layers
        self.taps = taps
        self.seed = seed

        for parameter in self.parameters():
            parameter.requires_grad_(False)

        self.eval()

    @property
    def dtype(self: FeatureEmbedder) -> torch.dtype:
        """Returns the dtype of the embedder parameters."""
        return next(self.parameters()).dtype

    def train(self: FeatureEmbedder, mode: bool = True) -> FeatureEmbedder:
        # Frozen: always stays in evaluation mode
        return super().train(False)

    def features(self: FeatureEmbedder, x: torch.Tensor) -> list[torch.Tensor]:
        """Returns the tapped feature maps of an N×3×H×W batch in [0, 1]."""
        h = 2.0 * x - 1.0
        tapped = []

        for index, layer in enumerate(self.layers):
            h = layer(h)
            if index in self.taps:
                tapped.append(h)

        return tapped

    def distance(self: FeatureEmbedder, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        """Returns, per image pair, the sum over taps of the mean squared feature difference.

        Args:
            a (torch.Tensor): An N×3×H×W batch.
            b (torch.Tensor): A batch of the same shape.

        Returns:
            torch.Tensor: The N distances. Differentiable in both arguments.
        """
        if a.shape != b.shape:
            raise MetricDomainError(f"Perceptual distance needs equal shapes, got {tuple(a.shape)} and {tuple(b.shape)}.")

        total = torch.zeros(a.shape[0], dtype=a.dtype, device=a.device)

        for phi_a, phi_b in zip(self.features(a), self.features(b)):
            total = total + (phi_a - phi_b).pow(2).flatten(1).mean(dim=1)

        return total

    def pooled_features(self: FeatureEmbedder, x: torch.Tensor) -> torch.Tensor:
        """Returns the globally average-pooled final tap, shape N×C."""
        return self.features(x)[-1].mean(dim=(2, 3))

    def forward(self: FeatureEmbedder, x: torch.Tensor) -> list[torch.Tensor]:
        return self.features(x)
