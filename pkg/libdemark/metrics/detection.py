#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import binom

from libdemark.metrics.latent import BitMessage
from libdemark.utils.exceptions import MetricDomainError, UnachievableThresholdError

DEFAULT_FPR = 0.001


def _check_fpr(fpr: float) -> None:
    if not 0.0 < fpr < 1.0:
        raise MetricDomainError(f"The false positive rate must lie in (0, 1), got {fpr}.")


def bit_accuracy(m: BitMessage, m_hat: BitMessage) -> float:
    """Returns the fraction of bits of m recovered in m_hat.

    Args:
        m (BitMessage): The embedded message.
        m_hat (BitMessage): The recovered message.

    Returns:
        float: A value in [0, 1].
    """
    if len(m) != len(m_hat):
        raise MetricDomainError(f"Message lengths differ: {len(m)} and {len(m_hat)}.")

    return float(np.count_nonzero(m.bits == m_hat.bits) / len(m))


@lru_cache(maxsize=256)
def detection_threshold(bit_length: int, fpr: float = DEFAULT_FPR) -> int:
    """Returns the minimum number of matching bits k such that P(Binomial(L, 1/2) >= k) <= fpr.

    Args:
        bit_length (int): The message length L.
        fpr (float, optional): The tolerated false positive rate. Defaults to 0.001.

    Returns:
        int: The threshold k. Detection fires when matches >= k.
    """
    _check_fpr(fpr)

    if bit_length < 1:
        raise MetricDomainError(f"The message length must be positive, got {bit_length}.")

    # binom.sf(k - 1) is P(X >= k)
    tails = binom.sf(np.arange(bit_length + 1) - 1, bit_length, 0.5)
    admissible = np.flatnonzero(tails <= fpr)

    if admissible.size == 0:
        raise UnachievableThresholdError(
            f"A {bit_length}-bit message cannot reach a false positive rate of {fpr} "
            f"(best is {tails[-1]:.3g})."
        )

    return int(admissible[0])


def detection_rate(bit_accuracies: Sequence[float], bit_length: int, fpr: float = DEFAULT_FPR) -> float:
    """Returns the fraction of images detected as watermarked under the binomial null.

    Args:
        bit_accuracies (Sequence[float]): The per-image bit accuracies.
        bit_length (int): The message length L.
        fpr (float, optional): The tolerated false positive rate. Defaults to 0.001.

    Returns:
        float: The detection accuracy in [0, 1].
    """
    if len(bit_accuracies) == 0:
        raise MetricDomainError("Cannot compute a detection rate without scores.")

    k = detection_threshold(bit_length, fpr)
    matches = np.rint(np.asarray(bit_accuracies, dtype=np.float64) * bit_length)

    return float(np.mean(matches >= k))


def tpr_at_fpr(pos_scores: Sequence[float], neg_scores: Sequence[float], fpr: float = DEFAULT_FPR) -> float:
    """Returns the true positive rate at the empirical threshold calibrated on negative scores.

    The threshold is the smallest value whose negative tail fraction is at most fpr. When that
    infimum is not attained it sits just above the largest negative score u whose tail
    fraction still exceeds fpr, so positives count when strictly greater than u.

    Args:
        pos_scores (Sequence[float]): Scores of watermarked samples.
        neg_scores (Sequence[float]): Scores of unwatermarked samples.
        fpr (float, optional): The tolerated false positive rate. Defaults to 0.001.

    Returns:
        float: The true positive rate in [0, 1].
    """
    _check_fpr(fpr)

    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.sort(np.asarray(neg_scores, dtype=np.float64))

    if pos.size == 0 or neg.size == 0:
        raise MetricDomainError("Both score sequences must be non-empty.")

    values = np.unique(neg)
    tail_fractions = (neg.size - np.searchsorted(neg, values, side="left")) / neg.size

    # The minimum negative always has tail fraction 1 > fpr, so u exists
    u = values[tail_fractions > fpr].max()

    return float(np.mean(pos > u))


def attack_success_rate(embedded: Sequence[BitMessage], recovered: Sequence[BitMessage]) -> float:
    """Returns the fraction of images whose recovered message differs from the embedded one."""
    if len(embedded) != len(recovered) or len(embedded) == 0:
        raise MetricDomainError("Expected two non-empty message sequences of equal length.")

    return float(np.mean([m != m_hat for m, m_hat in zip(embedded, recovered)]))
