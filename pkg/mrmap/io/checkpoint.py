"""JSON checkpoints of trained potentials.

Floats are written with Python's shortest round-trip repr, so loading a
checkpoint reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from mrmap.model.params import LEARNABLES, PotentialParams

logger = logging.getLogger(__name__)

FORMAT_NAME = "mrmap-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable or inconsistent checkpoint file."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by an incompatible format version."""


@dataclass
class Checkpoint:
    params: PotentialParams
    config: dict[str, Any] = field(default_factory=dict)
    metrics: list[dict[str, Any]] = field(default_factory=list)
    version: int = FORMAT_VERSION


def checkpoint_to_dict(
    params: PotentialParams,
    config: Optional[dict[str, Any]] = None,
    metrics: Optional[list[dict[str, Any]]] = None,
) -> dict[str, Any]:
    arrays = params.learnables()
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dims": {"p": params.p, "q": params.q, "ell": params.ell},
        "hyperparameters": params.hyperparameters(),
        "shapes": {name: list(arr.shape) for name, arr in arrays.items()},
        "params": {name: arr.ravel().tolist() for name, arr in arrays.items()},
        "config": config or {},
        "metrics": metrics or [],
    }


def save_checkpoint(
    path: Path,
    params: PotentialParams,
    config: Optional[dict[str, Any]] = None,
    metrics: Optional[list[dict[str, Any]]] = None,
) -> None:
    data = checkpoint_to_dict(params, config, metrics)
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    logger.debug("Saved checkpoint → %s", path)


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises
    ------
    CheckpointVersionError
        If the file declares another format version.
    CheckpointError
        If the file is not a readable, self-consistent checkpoint.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{path} is not an mrmap checkpoint")
    version = data.get("version")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint {path} has version {version!r}, expected {FORMAT_VERSION}"
        )
    try:
        arrays = {
            name: np.array(data["params"][name], dtype=np.float64).reshape(data["shapes"][name])
            for name in LEARNABLES
        }
        hyper = data["hyperparameters"]
        params = PotentialParams(
            **arrays,
            beta=float(hyper["beta"]),
            h=float(hyper["h"]),
            sigma=float(hyper["sigma"]),
            cg_iters=int(hyper["cg_iters"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    return Checkpoint(
        params=params,
        config=data.get("config", {}),
        metrics=data.get("metrics", []),
        version=version,
    )
