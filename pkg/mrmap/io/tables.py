"""CSV tables and datasets (UTF-8, comma-separated, LF newlines).

Datasets hold one flattened sample per row under a header of dimension
names, with a JSON sidecar of metadata next to the CSV.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comment: Optional[str] = None,
) -> None:
    """Write *rows* under *header*; an optional ``# comment`` line comes first."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.debug("Wrote %d rows → %s", count, path)


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Return (header, rows), skipping ``#`` comment lines."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    records = list(csv.reader(lines))
    if not records:
        raise ValueError(f"{path} has no header row")
    return records[0], records[1:]


def schema_comment(kind: str) -> str:
    return f"mrmap {kind} v{CSV_SCHEMA_VERSION}"


# --------------------------------------------------------------------------- #
# Datasets
# --------------------------------------------------------------------------- #


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def save_dataset(path: Path, X: np.ndarray, metadata: Optional[dict[str, Any]] = None) -> None:
    """Write rows of X (n × p) as CSV plus a JSON sidecar."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"dataset must be 2-D, got shape {X.shape}")
    header = [f"x{j}" for j in range(X.shape[1])]
    write_csv(path, header, X.tolist())
    meta = {"n": int(X.shape[0]), "p": int(X.shape[1]), **(metadata or {})}
    sidecar_path(path).write_text(json.dumps(meta, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_dataset(path: Path) -> tuple[np.ndarray, dict[str, Any]]:
    """Inverse of :func:`save_dataset`; the sidecar is optional."""
    header, rows = read_csv(path)
    if not rows:
        raise ValueError(f"dataset {path} has no samples")
    X = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    if X.shape[1] != len(header):
        raise ValueError(f"dataset {path} rows do not match its header")
    side = sidecar_path(path)
    meta = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    if meta.get("p", X.shape[1]) != X.shape[1]:
        raise ValueError(f"sidecar of {path} declares p={meta['p']}, data has {X.shape[1]}")
    return X, meta
