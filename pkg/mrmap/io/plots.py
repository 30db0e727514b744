"""SVG scatter plots.

Figures are built on :class:`matplotlib.figure.Figure` directly (no pyplot
state).  The SVG id salt and the date stamp are pinned so identical data
give identical bytes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

logger = logging.getLogger(__name__)

SVG_METADATA = {"Date": None}


@dataclass
class Series:
    """Columns of a 2 × n point matrix, drawn as one scatter layer."""

    points: np.ndarray
    label: str
    color: Optional[str] = None
    values: Optional[np.ndarray] = None  # per-point colour values


def _save(fig: Figure, path: Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "mrmap", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    logger.debug("Saved plot → %s", path)


def _draw(ax, series: Sequence[Series], title: str, equal: bool = True) -> None:
    for s in series:
        pts = np.asarray(s.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] != 2:
            raise ValueError(f"scatter points must be 2 × n, got shape {pts.shape}")
        if s.values is not None:
            ax.scatter(pts[0], pts[1], c=s.values, s=4, cmap="viridis", label=s.label)
        else:
            ax.scatter(pts[0], pts[1], s=4, color=s.color, label=s.label)
    ax.set_title(title)
    if equal:
        ax.set_aspect("equal", adjustable="datalim")
    if len(series) > 1:
        ax.legend(loc="upper right", fontsize="small")


def scatter_svg(path: Path, series: Sequence[Series], title: str = "") -> None:
    fig = Figure(figsize=(4.5, 4.5))
    _draw(fig.add_subplot(1, 1, 1), series, title)
    _save(fig, path)


def panels_svg(path: Path, panels: Sequence[tuple[str, Sequence[Series]]]) -> None:
    """One row of scatter panels sharing axes limits."""
    if not panels:
        raise ValueError("no panels to draw")
    fig = Figure(figsize=(4.0 * len(panels), 4.0))
    axes = fig.subplots(1, len(panels), sharex=True, sharey=True, squeeze=False)[0]
    for ax, (title, series) in zip(axes, panels):
        _draw(ax, series, title, equal=False)
    fig.tight_layout()
    _save(fig, path)
