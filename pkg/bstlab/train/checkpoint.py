"""
Versioned, self-describing checkpoint container.

The file is JSON: a format tag, a version, the ModelConfig, and every named
tensor with its shape and row-major values. Floats are written in their
shortest round-trip form, so loading reproduces parameters bit for bit.
"""

import json
import logging
from pathlib import Path

import numpy as np

from bstlab.core.config import ModelConfig, parse_model_config
from bstlab.core.errors import CheckpointError, ConfigError
from bstlab.models.params import ModelParams, expected_shapes
from bstlab.tensor import Tensor
from bstlab.tensor.kernel import DTYPE

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "bstlab-checkpoint"
CHECKPOINT_VERSION = 1


def save_checkpoint(params: ModelParams, config: ModelConfig, path: str | Path) -> Path:
    """Write ``params`` and ``config`` to ``path``."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": config.model_dump(mode="json", by_alias=True),
        "tensors": {
            name: {"shape": list(tensor.shape), "data": tensor.data.ravel().tolist()}
            for name, tensor in sorted(params.tensors.items())
        },
    }
    with target.open("w", encoding="utf-8") as f:
        json.dump(payload, f)
    logger.info(f"Saved checkpoint for {config.label} to {target}")
    return target


def _read_payload(source: Path) -> dict:
    try:
        with source.open(encoding="utf-8") as f:
            payload = json.load(f)
    except FileNotFoundError:
        raise CheckpointError(f"Checkpoint not found: {source}")
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError(f"Checkpoint {source} is truncated or corrupt: {e}")
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{source} is not a bstlab checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Checkpoint version {payload.get('version')} is not supported "
            f"(expected {CHECKPOINT_VERSION})"
        )
    return payload


def read_checkpoint_config(path: str | Path) -> ModelConfig:
    """The ModelConfig a checkpoint was saved with."""
    source = Path(path)
    payload = _read_payload(source)
    return _stored_config(payload, source)


def _stored_config(payload: dict, source: Path) -> ModelConfig:
    try:
        return parse_model_config(payload.get("config") or {})
    except ConfigError as e:
        raise CheckpointError(f"Checkpoint {source} carries an invalid config: {e.message}")


def _first_difference(stored: object, expected: object, prefix: str = "") -> str | None:
    if isinstance(stored, dict) and isinstance(expected, dict):
        for key in sorted(set(stored) | set(expected)):
            found = _first_difference(stored.get(key), expected.get(key), f"{prefix}{key}.")
            if found:
                return found
        return None
    if stored != expected:
        return f"{prefix.rstrip('.')}: checkpoint has {stored!r}, config has {expected!r}"
    return None


def check_config(stored: ModelConfig, expected: ModelConfig) -> None:
    """
    Require a checkpoint's config to equal the expected one, seeds aside.

    Raises:
        CheckpointError: Naming the first differing setting.
    """
    a = stored.model_dump(mode="json", by_alias=True, exclude={"seed"})
    b = expected.model_dump(mode="json", by_alias=True, exclude={"seed"})
    difference = _first_difference(a, b)
    if difference:
        raise CheckpointError(f"Checkpoint does not match the config ({difference})")


def load_checkpoint(
    path: str | Path,
    config: ModelConfig | None = None,
) -> tuple[ModelParams, ModelConfig]:
    """
    Load a checkpoint, optionally into an explicitly given ModelConfig.

    An explicit config must describe the same model as the stored one: tensor
    shapes are checked first, then every remaining setting except the seed.

    Raises:
        CheckpointError: On a missing, truncated or foreign file, a version
            mismatch, a tensor whose shape disagrees with the config, or a
            config that differs from the stored one.
    """
    source = Path(path)
    payload = _read_payload(source)
    explicit = config is not None
    if config is None:
        config = _stored_config(payload, source)

    stored = payload.get("tensors")
    if not isinstance(stored, dict):
        raise CheckpointError(f"Checkpoint {source} has no tensors")

    tensors: dict[str, Tensor] = {}
    for name, shape in expected_shapes(config).items():
        entry = stored.get(name)
        if entry is None:
            raise CheckpointError(f"Tensor {name} is missing from the checkpoint", tensor=name)
        stored_shape = tuple(entry.get("shape", ()))
        if stored_shape != shape:
            raise CheckpointError(
                f"Tensor {name} has shape {stored_shape} but the config expects {shape}",
                tensor=name,
            )
        data = np.asarray(entry.get("data", []), dtype=DTYPE)
        if data.size != shape[0] * shape[1]:
            raise CheckpointError(f"Tensor {name} holds {data.size} values for shape {shape}", tensor=name)
        tensors[name] = Tensor.param(name, data.reshape(shape))

    extra = sorted(set(stored) - set(tensors))
    if extra:
        raise CheckpointError(f"Tensor {extra[0]} is not part of the config", tensor=extra[0])
    if explicit:
        check_config(_stored_config(payload, source), config)

    logger.debug(f"Loaded {len(tensors)} tensors from {source}")
    return ModelParams(tensors=tensors, config=config), config
