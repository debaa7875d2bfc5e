#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from libdemark.losses.feature_embedder import FeatureEmbedder


class EmbedderProvider:
    """Provides construction and caching of the fixed feature embedders."""

    _instance = None

    def __new__(cls, *args, **kwargs) -> EmbedderProvider:
        if cls._instance is None:
            cls._instance = super(EmbedderProvider, cls).__new__(cls)
            cls._instance.embedders = {}
        return cls._instance

    def has_cached_embedder(self: EmbedderProvider, seed: int) -> bool:
        """Returns whether the embedder of the given seed is cached or not.

        Args:
            seed (int): The embedder seed.

        Returns:
            bool: True if the embedder is cached, False otherwise.
        """
        return seed in self.embedders

    def get_embedder(self: EmbedderProvider, seed: int) -> FeatureEmbedder:
        """Builds the embedder of the given seed if not cached and returns it.

        Args:
            seed (int): The embedder seed.

        Returns:
            FeatureEmbedder: The shared, read-only embedder.
        """
        if seed not in self.embedders:
            self.embedders[seed] = FeatureEmbedder(seed)

        return self.embedders[seed]


embedder_provider = EmbedderProvider()
