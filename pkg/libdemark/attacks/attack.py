#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Sequence

from libdemark.attacks.distortion import DistortionSpec, distort

if TYPE_CHECKING:
    from libdemark.demark.attack_model import AttackModel
    from libdemark.imagekit.image_tensor import ImageTensor

AttackFn = Callable[["ImageTensor"], "ImageTensor"]


class Attack:
    """Represents a watermark removal attack. It only ever sees the image to attack."""

    def __init__(self: Attack, name: str) -> None:
        """Initializes the attack with its registry name.

        Args:
            name (str): The name the attack is registered under.
        """
        self.name = name

    def __call__(self: Attack, x: ImageTensor) -> ImageTensor:
        raise NotImplementedError()

    def attack_batch(self: Attack, images: Sequence[ImageTensor]) -> list[ImageTensor]:
        """Attacks every image."""
        return [self(x) for x in images]

    @property
    def parameter_bytes(self: Attack) -> int:
        """Returns the memory held by learned parameters, in bytes."""
        return 0

    def __repr__(self: Attack) -> str:
        return f"{type(self).__name__}({self.name})"


class IdentityAttack(Attack):
    """The no-attack baseline."""

    def __init__(self: IdentityAttack) -> None:
        super().__init__("no-attack")

    def __call__(self: IdentityAttack, x: ImageTensor) -> ImageTensor:
        return x


class DistortionAttack(Attack):
    """A baseline distortion at a fixed strength."""

    def __init__(self: DistortionAttack, spec: DistortionSpec, name: str | None = None) -> None:
        super().__init__(name or spec.name)
        self.spec = spec

    def __call__(self: DistortionAttack, x: ImageTensor) -> ImageTensor:
        return distort(x, self.spec)


class DeMarkAttack(Attack):
    """The sparse-bottleneck attack of a trained attack model."""

    def __init__(self: DeMarkAttack, model: AttackModel, name: str = "demark") -> None:
        super().__init__(name)
        self.model = model

    def __call__(self: DeMarkAttack, x: ImageTensor) -> ImageTensor:
        return self.model.attack(x)

    def attack_batch(self: DeMarkAttack, images: Sequence[ImageTensor]) -> list[ImageTensor]:
        return self.model.attack_batch(images)

    @property
    def parameter_bytes(self: DeMarkAttack) -> int:
        """Returns the memory held by the attack model parameters, in bytes."""
        return self.model.parameter_bytes


class FunctionAttack(Attack):
    """An attack supplied as a plain function."""

    def __init__(self: FunctionAttack, name: str, fn: AttackFn) -> None:
        super().__init__(name)
        self.fn = fn

    def __call__(self: FunctionAttack, x: ImageTensor) -> ImageTensor:
        return self.fn(x)
