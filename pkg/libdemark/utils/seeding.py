#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import os
import random

import numpy as np
import torch


def seed_everything(seed: int) -> None:
    """Seeds every random number generator used by libdemark.

    Args:
        seed (int): The seed.
    """
    os.environ["PYTHONHASHSEED"] = str(seed)
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


def torch_generator(seed: int) -> torch.Generator:
    """Returns a CPU torch generator seeded with the given seed."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


def derive_seed(seed: int, *salt: int) -> int:
    """Derives a child seed from a parent seed and integer salts, stable across runs."""
    sequence = np.random.SeedSequence([seed % (2**32), *[s % (2**32) for s in salt]])
    return int(sequence.generate_state(1)[0])
