"""Validation checks for parameters, trajectories and datasets."""

from __future__ import annotations

import numpy as np

from mrmap.model.flow import interior_residual
from mrmap.model.params import FlowTrajectory, PotentialParams


def validate_params(params: PotentialParams) -> list[str]:
    """Return a list of parameter-level problems."""
    errors: list[str] = list(params.shape_errors())
    for name, arr in params.learnables().items():
        if not np.all(np.isfinite(arr)):
            errors.append(f"{name} contains non-finite entries")
    if params.layer_w.size and params.layer_w.min() < 0:
        errors.append(
            f"layer weights must be nonnegative (min w = {params.layer_w.min():.3g}); φ is not convex"
        )
    return errors


def validate_trajectory(
    params: PotentialParams, traj: FlowTrajectory, tol: float = 1e-12
) -> list[str]:
    """Return problems with a forward trajectory (shape, recurrence, initializer bound)."""
    errors: list[str] = []
    if traj.u.shape[0] != params.ell + 1 or traj.u.shape[-1] != params.q:
        return [f"trajectory shape {traj.u.shape} does not match ell={params.ell}, q={params.q}"]
    if not np.all(np.isfinite(traj.u)):
        errors.append("trajectory contains non-finite entries")
        return errors
    residual = interior_residual(params, traj)
    if residual > tol:
        errors.append(f"interior recurrence residual {residual:.3e} exceeds {tol:.1e}")
    jump = float(np.max(np.abs(traj.u[1] - traj.u[0]), initial=0.0))
    if jump > 1.0 + 1e-12:
        errors.append(f"initializer correction {jump:.6g} exceeds 1")
    return errors


def validate_dataset(X: np.ndarray, p: int | None = None) -> list[str]:
    """Return problems with a dataset of samples as rows."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] == 0:
        return [f"dataset must be a non-empty 2-D array, got shape {X.shape}"]
    errors: list[str] = []
    if not np.all(np.isfinite(X)):
        errors.append("dataset contains non-finite entries")
    if p is not None and X.shape[1] != p:
        errors.append(f"dataset has dimension {X.shape[1]}, model expects p={p}")
    return errors
