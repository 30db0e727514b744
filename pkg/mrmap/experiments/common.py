"""Output helpers shared by the experiment runners."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from mrmap.io.tables import schema_comment, write_csv
from mrmap.training.trainer import EpochMetrics

METRICS_HEADER = ["epoch", "R_e", "R_p", "R_c", "total", "lr"]


def write_metrics(path: Path, metrics: Sequence[EpochMetrics]) -> None:
    """Per-epoch losses; wall time is left out so the file is reproducible."""
    rows = [[m.as_row()[key] for key in METRICS_HEADER] for m in metrics]
    write_csv(path, METRICS_HEADER, rows, comment=schema_comment("metrics"))


def wall_times(metrics: Sequence[EpochMetrics]) -> list[float]:
    return [round(m.wall_time, 3) for m in metrics]
