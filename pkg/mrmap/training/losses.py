"""Recovery, predictive and consistency losses.

Per sample:

    R_e = ‖K u_ℓ − x‖²        R_p = ‖P K u_ℓ − P x‖²        R_c = ‖q − u_ℓ‖²

Batches average the per-sample terms, and the total is R_e + α R_p + γ R_c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mrmap.model.flow import Latent, decode
from mrmap.model.params import FlowTrajectory, PotentialParams


def _sq(v: np.ndarray):
    return np.sum(v * v, axis=-1)


def compute_losses(
    params: PotentialParams,
    traj: FlowTrajectory,
    datum: Latent,
    x_true: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return per-sample (R_e, R_p, R_c); scalars for a single datum."""
    x_true = np.asarray(x_true, dtype=np.float64)
    x_hat = decode(params, traj.u_ell)
    if x_true.shape != x_hat.shape:
        raise ValueError(f"x_true has shape {x_true.shape}, recovery has {x_hat.shape}")
    if traj.q_vec is None:
        raise ValueError("trajectory carries no terminal vector q")
    err = x_hat - x_true
    R_e = _sq(err)
    R_p = _sq(datum.operator.apply(err))
    R_c = _sq(traj.q_vec - traj.u_ell)
    return R_e, R_p, R_c


def total_loss(R_e, R_p, R_c, alpha: float = 1.0, gamma: float = 1.0):
    return R_e + alpha * R_p + gamma * R_c


@dataclass(frozen=True)
class LossTerms:
    """Batch means of the three loss terms."""

    R_e: float
    R_p: float
    R_c: float

    @classmethod
    def from_samples(cls, R_e, R_p, R_c) -> "LossTerms":
        return cls(float(np.mean(R_e)), float(np.mean(R_p)), float(np.mean(R_c)))

    def total(self, alpha: float = 1.0, gamma: float = 1.0) -> float:
        return float(total_loss(self.R_e, self.R_p, self.R_c, alpha, gamma))

    def is_finite(self) -> bool:
        return bool(np.isfinite([self.R_e, self.R_p, self.R_c]).all())
