"""Procedural grayscale image corpus for desk-scale recovery experiments.

Images are size × size arrays in [0, 1] drawn from three shape families:
bars (horizontal or vertical stripes), discs and linear gradients.  Each
image is flattened row-major into one sample.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class ShapeFamily(str, Enum):
    BARS = "bars"
    DISC = "disc"
    GRADIENT = "gradient"


_FAMILIES = tuple(ShapeFamily)


def _bars(grid_y: np.ndarray, grid_x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    size = grid_x.shape[0]
    axis = grid_y if rng.random() < 0.5 else grid_x
    width = int(rng.integers(1, max(2, size // 2)))
    start = int(rng.integers(0, size - width + 1))
    img = np.full(grid_x.shape, 0.1 + 0.2 * rng.random())
    img[(axis >= start) & (axis < start + width)] = 0.6 + 0.4 * rng.random()
    return img


def _disc(grid_y: np.ndarray, grid_x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    size = grid_x.shape[0]
    cy, cx = rng.uniform(1.0, size - 2.0, size=2)
    radius = rng.uniform(1.2, size / 2.5)
    inside = (grid_y - cy) ** 2 + (grid_x - cx) ** 2 <= radius**2
    img = np.full(grid_x.shape, 0.05 + 0.25 * rng.random())
    img[inside] = 0.55 + 0.45 * rng.random()
    return img


def _gradient(grid_y: np.ndarray, grid_x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    size = grid_x.shape[0]
    angle = rng.uniform(0.0, 2.0 * np.pi)
    proj = np.cos(angle) * grid_x + np.sin(angle) * grid_y
    proj = (proj - proj.min()) / max(proj.max() - proj.min(), 1e-12)
    lo = 0.1 * rng.random()
    hi = 0.6 + 0.4 * rng.random()
    return lo + (hi - lo) * proj


_BUILDERS = {
    ShapeFamily.BARS: _bars,
    ShapeFamily.DISC: _disc,
    ShapeFamily.GRADIENT: _gradient,
}


def generate_images(n: int, rng: np.random.Generator, size: int = 8) -> np.ndarray:
    """Return *n* flattened images as an (n, size²) array."""
    if n < 1 or size < 4:
        raise ValueError(f"need n >= 1 and size >= 4, got n={n}, size={size}")
    grid_y, grid_x = np.mgrid[0:size, 0:size].astype(np.float64)
    out = np.empty((n, size * size))
    for i in range(n):
        family = _FAMILIES[int(rng.integers(0, len(_FAMILIES)))]
        img = _BUILDERS[family](grid_y, grid_x, rng)
        out[i] = np.clip(img, 0.0, 1.0).ravel()
    return out
