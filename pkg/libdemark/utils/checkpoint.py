#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch

from libdemark.utils.exceptions import CheckpointError
from libdemark.utils.hashing import stable_hash
from libdemark.utils.version_str import VersionStr

CHECKPOINT_MAGIC = b"LDMKCKPT"
CHECKPOINT_FORMAT_VERSION = VersionStr("1.0")

# magic, then the header length as little-endian u32
_PREAMBLE = struct.Struct("<8sI")


@dataclass
class Checkpoint:
    """A serialized set of named parameters together with the configuration that produced them."""

    kind: str
    """The component stored in the container, e.g. "attack_model" or "watermarker"."""

    config: dict[str, Any]
    """The JSON form of the component configuration."""

    seed: int
    """The seed the component was trained with."""

    epochs: int
    """The number of completed training epochs."""

    loss_trace: list[float]
    """The per-epoch mean training loss."""

    tensors: dict[str, torch.Tensor]
    """The named parameter blobs. Names are namespaced with "/"."""

    extra: dict[str, Any] = field(default_factory=dict)
    """Free-form JSON metadata."""

    format_version: VersionStr = CHECKPOINT_FORMAT_VERSION
    """The container format version."""

    @property
    def config_hash(self: Checkpoint) -> str:
        """Returns the provenance hash of the stored configuration."""
        return stable_hash(self.config)


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> None:
    """Writes the checkpoint to the given path.

    Args:
        checkpoint (Checkpoint): The checkpoint to write.
        path (str | Path): The destination file.
    """
    table = []
    blobs = []
    offset = 0

    for name in sorted(checkpoint.tensors):
        array = checkpoint.tensors[name].detach().cpu().numpy()
        array = np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<"))
        blob = array.tobytes()

        table.append(
            {
                "name": name,
                "dtype": array.dtype.str,
                "shape": list(array.shape),
                "offset": offset,
                "nbytes": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)

    header = {
        "format_version": str(checkpoint.format_version),
        "kind": checkpoint.kind,
        "config": checkpoint.config,
        "config_hash": checkpoint.config_hash,
        "seed": checkpoint.seed,
        "epochs": checkpoint.epochs,
        "loss_trace": [float(v) for v in checkpoint.loss_trace],
        "extra": checkpoint.extra,
        "tensors": table,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "wb") as file:
        file.write(_PREAMBLE.pack(CHECKPOINT_MAGIC, len(header_bytes)))
        file.write(header_bytes)

        for blob in blobs:
            file.write(blob)


def load_checkpoint(path: str | Path, expected_kind: str | None = None) -> Checkpoint:
    """Reads and validates a checkpoint.

    Args:
        path (str | Path): The checkpoint file.
        expected_kind (str, optional): If given, the stored kind must match. Defaults to None.

    Returns:
        Checkpoint: The decoded checkpoint.
    """
    path = Path(path)

    if not path.is_file():
        raise CheckpointError(f"Checkpoint {path} does not exist.")

    content = path.read_bytes()

    if len(content) < _PREAMBLE.size:
        raise CheckpointError(f"Checkpoint {path} is truncated.")

    magic, header_length = _PREAMBLE.unpack_from(content)

    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} is not a libdemark checkpoint.")

    header_end = _PREAMBLE.size + header_length

    try:
        header = json.loads(content[_PREAMBLE.size : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Checkpoint {path} has a corrupt header: {e}") from e

    version = VersionStr(header["format_version"])

    if not version.is_compatible_with(CHECKPOINT_FORMAT_VERSION):
        raise CheckpointError(
            f"Checkpoint format {version} is not supported (expected {CHECKPOINT_FORMAT_VERSION.major}.x)."
        )

    if stable_hash(header["config"]) != header["config_hash"]:
        raise CheckpointError(f"Checkpoint {path} does not match its configuration hash.")

    if expected_kind is not None and header["kind"] != expected_kind:
        raise CheckpointError(f"Checkpoint {path} holds a {header['kind']}, not a {expected_kind}.")

    tensors = {}
    blob_area = content[header_end:]

    for entry in header["tensors"]:
        start = entry["offset"]
        stop = start + entry["nbytes"]

        if stop > len(blob_area):
            raise CheckpointError(f"Checkpoint {path} is truncated at tensor {entry['name']}.")

        array = np.frombuffer(blob_area[start:stop], dtype=np.dtype(entry["dtype"]))
        tensors[entry["name"]] = torch.from_numpy(array.reshape(entry["shape"]).copy())

    return Checkpoint(
        kind=header["kind"],
        config=header["config"],
        seed=header["seed"],
        epochs=header["epochs"],
        loss_trace=header["loss_trace"],
        tensors=tensors,
        extra=header.get("extra", {}),
        format_version=version,
    )


def module_tensors(namespace: str, module: torch.nn.Module) -> dict[str, torch.Tensor]:
    """Returns the state of a module with every key prefixed by namespace + "/"."""
    return {f"{namespace}/{key}": value for key, value in module.state_dict().items()}


def restore_module(namespace: str, module: torch.nn.Module, tensors: dict[str, torch.Tensor]) -> None:
    """Loads the namespaced tensors into the module.

    Args:
        namespace (str): The key prefix, without the trailing "/".
        module (torch.nn.Module): The module to restore.
        tensors (dict[str, torch.Tensor]): The checkpoint tensors.
    """
    prefix = f"{namespace}/"
    state = {key[len(prefix) :]: value for key, value in tensors.items() if key.startswith(prefix)}

    try:
        module.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"Checkpoint tensors under {namespace}/ do not fit the model: {e}") from e
