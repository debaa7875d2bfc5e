#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

from collections.abc import Mapping
from typing import TYPE_CHECKING, Any, Iterator

from libdemark.attacks.attack import Attack, DeMarkAttack, DistortionAttack, IdentityAttack
from libdemark.attacks.distortion import DistortionKind, DistortionSpec
from libdemark.utils.exceptions import ConfigError, MetricDomainError, RegistryError

if TYPE_CHECKING:
    from libdemark.demark.attack_model import AttackModel

DEMARK_ATTACK = "demark"

DEFAULT_STRENGTHS = {
    DistortionKind.BRIGHTNESS: 1.5,
    DistortionKind.CONTRAST: 1.5,
    DistortionKind.GAUSSIAN_BLUR: 1.0,
    DistortionKind.GAUSSIAN_NOISE: 0.05,
    DistortionKind.JPEG: 50,
}


class AttackRegistry(Mapping):
    """A name → attack mapping whose lookups of unknown names raise RegistryError."""

    def __init__(self: AttackRegistry) -> None:
        self._attacks: dict[str, Attack] = {}

    def add(self: AttackRegistry, attack: Attack) -> None:
        """Registers an attack under its name, which must be unused."""
        if attack.name in self._attacks:
            raise RegistryError(f"An attack named {attack.name!r} is already registered.")

        self._attacks[attack.name] = attack

    def __getitem__(self: AttackRegistry, name: str) -> Attack:
        if name not in self._attacks:
            if name == DEMARK_ATTACK:
                raise RegistryError("The demark attack needs a trained attack model.")

            raise RegistryError(f"Unknown attack {name!r}; available: {sorted(self._attacks)}.")

        return self._attacks[name]

    def __iter__(self: AttackRegistry) -> Iterator[str]:
        return iter(self._attacks)

    def __len__(self: AttackRegistry) -> int:
        return len(self._attacks)

    def check_names(self: AttackRegistry, names: list[str]) -> None:
        """Raises RegistryError naming the first unregistered attack."""
        for name in names:
            self[name]


def distortion_attack_from_dict(payload: dict[str, Any]) -> DistortionAttack:
    """Builds a named distortion attack from {"name", "kind", "strength", "seed"}."""
    try:
        spec = DistortionSpec(payload["kind"], float(payload["strength"]), int(payload.get("seed", 0)))
    except (KeyError, TypeError, ValueError, MetricDomainError) as e:
        raise ConfigError(f"Invalid attack entry {payload}: {e}") from e

    return DistortionAttack(spec, payload.get("name"))


def attack_registry(
    attack_model: AttackModel | None = None,
    strengths: dict[str, float] | None = None,
    extra: list[Attack] | None = None,
    seed: int = 0,
) -> AttackRegistry:
    """Returns the registry of every available attack.

    It holds "no-attack", the five distortions under their kind names and, when a model is given, "demark".

    Args:
        attack_model (AttackModel, optional): The trained attack model. Defaults to None.
        strengths (dict[str, float], optional): Overrides of the default distortion strengths. Defaults to None.
        extra (list[Attack], optional): Further attacks, e.g. the same distortion at other strengths. Defaults to None.
        seed (int, optional): The seed of the noise distortion. Defaults to 0.

    Returns:
        AttackRegistry: The registry.
    """
    strengths = strengths or {}

    unknown = [name for name in strengths if name not in {kind.value for kind in DistortionKind}]
    if unknown:
        raise RegistryError(f"Unknown distortions {unknown}.")

    registry = AttackRegistry()
    registry.add(IdentityAttack())

    for kind, default in DEFAULT_STRENGTHS.items():
        registry.add(DistortionAttack(DistortionSpec(kind, strengths.get(kind.value, default), seed)))

    if attack_model is not None:
        registry.add(DeMarkAttack(attack_model))

    for attack in extra or ():
        registry.add(attack)

    return registry
