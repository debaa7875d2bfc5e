#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from libdemark.metrics.latent import Latent
from libdemark.utils.exceptions import DegenerateSupportError, MetricDomainError

DEFAULT_TAU = 0.02


@dataclass(frozen=True)
class DispersalReport:
    """The dispersal effect of a sparse latent Z against a reference latent z."""

    sc: float
    """Sparsity change: significant fraction of Z minus significant fraction of z."""

    ir: float
    """Intensity redistribution: mean energy of Z minus mean energy of z."""

    pr: float
    """Positional redistribution: W1 distance between significant-position distributions."""

    slr_sparse: float
    """Fraction of Z below tau."""

    slr_reference: float
    """Fraction of z below tau."""

    tau: float
    """The significance threshold."""

    def to_dict(self: DispersalReport) -> dict[str, float]:
        """Returns the JSON form with the fixed key names."""
        return asdict(self)


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise MetricDomainError(f"The significance threshold must be positive, got {tau}.")


def _significant_fraction(latent: Latent, tau: float) -> float:
    return np.count_nonzero(np.abs(latent.data) > tau) / latent.size


def sparsity_change(Z: Latent, z: Latent, tau: float = DEFAULT_TAU) -> float:
    """Returns the change in the fraction of coefficients whose magnitude exceeds tau.

    Args:
        Z (Latent): The sparse latent.
        z (Latent): The reference latent.
        tau (float, optional): The significance threshold. Defaults to 0.02.

    Returns:
        float: A value in [-1, 1]. Negative when Z is sparser than z.
    """
    _check_tau(tau)
    return float(_significant_fraction(Z, tau) - _significant_fraction(z, tau))


def intensity_redistribution(Z: Latent, z: Latent) -> float:
    """Returns the mean squared magnitude of Z minus that of z."""
    return float(np.mean(Z.data**2) - np.mean(z.data**2))


def significant_positions(latent: Latent, tau: float) -> np.ndarray:
    """Returns the sorted normalized positions i / (N - 1) of the coefficients above tau.

    Args:
        latent (Latent): The latent.
        tau (float): The significance threshold.

    Returns:
        np.ndarray: Positions in [0, 1].
    """
    indices = np.flatnonzero(np.abs(latent.data) > tau)

    if indices.size == 0:
        raise DegenerateSupportError(f"The latent has no coefficient above tau={tau}.")

    if latent.size == 1:
        return np.zeros(1)

    return indices / (latent.size - 1)


def quantile_resample(sorted_samples: np.ndarray, n: int) -> np.ndarray:
    """Evaluates the empirical inverse CDF of the samples at the mid-quantiles (k + 1/2) / n.

    Args:
        sorted_samples (np.ndarray): Samples in ascending order.
        n (int): The grid size.

    Returns:
        np.ndarray: n quantiles in ascending order.
    """
    m = sorted_samples.size
    levels = (np.arange(n) + 0.5) / n
    indices = np.ceil(levels * m).astype(int) - 1

    return sorted_samples[np.clip(indices, 0, m - 1)]


def wasserstein_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Returns the 1-D Wasserstein-1 distance of two empirical samples on a shared quantile grid.

    The smaller sample is resampled to max(|a|, |b|) quantiles, so equal-size samples
    give the exact distance.
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n = max(a.size, b.size)

    return float(np.mean(np.abs(quantile_resample(a, n) - quantile_resample(b, n))))


def positional_redistribution(Z: Latent, z: Latent, tau: float = DEFAULT_TAU) -> float:
    """Returns the W1 distance between the normalized positions of the significant coefficients.

    Args:
        Z (Latent): The sparse latent.
        z (Latent): The reference latent.
        tau (float, optional): The significance threshold. Defaults to 0.02.

    Returns:
        float: A non-negative distance in normalized-position units.
    """
    _check_tau(tau)
    return wasserstein_1d(significant_positions(Z, tau), significant_positions(z, tau))


def slr(Z: Latent, tau: float = DEFAULT_TAU) -> float:
    """Returns the fraction of coefficients whose magnitude is strictly below tau."""
    _check_tau(tau)
    return float(np.count_nonzero(np.abs(Z.data) < tau) / Z.size)


def dispersal_report(Z: Latent, z: Latent, tau: float = DEFAULT_TAU) -> DispersalReport:
    """Computes every dispersal metric of Z against z.

    Args:
        Z (Latent): The sparse latent.
        z (Latent): The reference latent.
        tau (float, optional): The significance threshold. Defaults to 0.02.

    Returns:
        DispersalReport: The report.
    """
    return DispersalReport(
        sc=sparsity_change(Z, z, tau),
        ir=intensity_redistribution(Z, z),
        pr=positional_redistribution(Z, z, tau),
        slr_sparse=slr(Z, tau),
        slr_reference=slr(z, tau),
        tau=tau,
    )
