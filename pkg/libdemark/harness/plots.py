#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

if TYPE_CHECKING:
    from libdemark.metrics.latent import Latent


def plot_slr_histograms(slrs: dict[str, list[float]], tau: float, path: str | Path) -> None:
    """Writes overlaid SLR histograms, one per labelled latent family.

    Args:
        slrs (dict[str, list[float]]): The per-image SLR values of every family.
        tau (float): The threshold the SLRs were computed at.
        path (str | Path): The PNG file.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    bins = np.linspace(0.0, 1.0, 41)

    for label, values in slrs.items():
        ax.hist(values, bins=bins, alpha=0.5, label=f"{label} (median {np.median(values):.3f})")

    ax.set_xlabel(f"SLR at tau = {tau}")
    ax.set_ylabel("images")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def channel_mean_magnitude(latent: Latent) -> np.ndarray:
    """Returns the mean magnitude over channels of a C×H×W latent."""
    array = np.abs(latent.as_array())

    if array.ndim == 3:
        return array.mean(axis=0)

    return array.reshape(1, -1)


def plot_latent_maps(latents: dict[str, Latent], path: str | Path) -> None:
    """Writes side by side heat maps of the channel-mean magnitude of each latent."""
    fig, axes = plt.subplots(1, len(latents), figsize=(4 * len(latents), 4), squeeze=False)

    for ax, (label, latent) in zip(axes[0], latents.items()):
        image = ax.imshow(channel_mean_magnitude(latent), cmap="viridis")
        ax.set_title(label)
        ax.axis("off")
        fig.colorbar(image, ax=ax, fraction=0.046)

    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
