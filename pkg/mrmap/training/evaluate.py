"""Monte-Carlo estimate of the frequentist recovery MSE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from mrmap.data.operators import LatentBatch, make_latent_batch
from mrmap.linalg.arrays import as_matrix
from mrmap.model.flow import recover
from mrmap.model.params import PotentialParams

Estimator = Union[PotentialParams, Callable[[LatentBatch], np.ndarray]]


@dataclass(frozen=True)
class MSEEstimate:
    mean: float
    se: float
    n_draws: int


def _apply(estimator: Estimator, batch: LatentBatch) -> np.ndarray:
    if isinstance(estimator, PotentialParams):
        return recover(estimator, batch)
    return np.asarray(estimator(batch), dtype=np.float64)


def empirical_mse_stats(
    estimator: Estimator,
    x_eval,
    sigma: float,
    mask_fraction: float,
    n_noise: int,
    rng: np.random.Generator,
) -> MSEEstimate:
    """Mean of ‖x̂ − x‖² over the columns of *x_eval* (p × n) and *n_noise* fresh (P, ε) draws.

    *estimator* is a trained model or any callable mapping a latent batch to
    recovered rows.  The standard error treats every (point, draw) pair as
    one observation.
    """
    if n_noise < 1:
        raise ValueError(f"n_noise must be >= 1, got {n_noise}")
    X = as_matrix(x_eval, "x_eval").T
    errors = np.empty((n_noise, X.shape[0]))
    for k in range(n_noise):
        batch = make_latent_batch(X, mask_fraction, sigma, rng)
        diff = _apply(estimator, batch) - X
        errors[k] = np.sum(diff * diff, axis=-1)
    flat = errors.ravel()
    se = float(flat.std(ddof=1) / math.sqrt(flat.size)) if flat.size > 1 else 0.0
    return MSEEstimate(mean=float(flat.mean()), se=se, n_draws=int(flat.size))


def empirical_mse(
    estimator: Estimator,
    x_eval,
    sigma: float,
    mask_fraction: float,
    n_noise: int,
    rng: np.random.Generator,
) -> float:
    return empirical_mse_stats(estimator, x_eval, sigma, mask_fraction, n_noise, rng).mean
