"""ASCII PGM (P2) image files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

MAXVAL = 255


def to_gray_levels(img: np.ndarray) -> np.ndarray:
    """Map intensities in [0, 1] to integer levels 0..255 (clipped)."""
    return np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * MAXVAL).astype(np.int64)


def write_pgm(path: Path, img: np.ndarray) -> None:
    levels = to_gray_levels(img)
    if levels.ndim != 2:
        raise ValueError(f"PGM images must be 2-D, got shape {levels.shape}")
    h, w = levels.shape
    lines = ["P2", f"{w} {h}", str(MAXVAL)]
    lines.extend(" ".join(str(v) for v in row) for row in levels)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def tile_images(images: Sequence[np.ndarray], gap: int = 1, fill: float = 1.0) -> np.ndarray:
    """Place equally sized 2-D images side by side, separated by *gap* columns."""
    if not images:
        raise ValueError("nothing to tile")
    h, w = images[0].shape
    out = np.full((h, len(images) * (w + gap) - gap), fill)
    for k, img in enumerate(images):
        if img.shape != (h, w):
            raise ValueError("tiled images must share one shape")
        out[:, k * (w + gap): k * (w + gap) + w] = img
    return out
