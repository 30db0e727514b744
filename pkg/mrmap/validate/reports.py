"""Run and recovery reporting."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np


def relative_error_stats(errors: Sequence[float]) -> dict[str, float]:
    """Mean and standard deviation of relative recovery errors."""
    arr = np.asarray(errors, dtype=np.float64)
    if arr.size == 0:
        return {"mean": float("nan"), "std": float("nan"), "count": 0}
    return {"mean": float(arr.mean()), "std": float(arr.std()), "count": int(arr.size)}


def build_run_report(
    command: str,
    outputs: list[str],
    summary: Optional[dict[str, Any]] = None,
    problems: Optional[list[str]] = None,
    warnings: Optional[list[str]] = None,
) -> dict[str, Any]:
    """Build a serialisable report dict."""
    return {
        "command": command,
        "outputs": outputs,
        "summary": summary or {},
        "problems": problems or [],
        "warnings": warnings or [],
        "ok": not problems,
    }


def save_report(report: dict[str, Any], path: Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
