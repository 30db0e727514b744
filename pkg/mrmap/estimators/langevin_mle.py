"""Maximum-likelihood baseline for a Gaussian precision, trained with Langevin samples.

The likelihood gradient needs expectations under the current model, which
are estimated from persistent unadjusted Langevin chains.  The cost that
matters is the number of potential-gradient evaluations, which is counted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mrmap.data.samplers import langevin_run, precision_inverse
from mrmap.estimators.gaussian import mle_grad_estimate
from mrmap.linalg.arrays import as_matrix

logger = logging.getLogger(__name__)


@dataclass
class PrecisionFit:
    Theta: np.ndarray
    history: list[np.ndarray] = field(default_factory=list)
    grad_evals: int = 0


def project_spd(Theta: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Symmetrize and clip eigenvalues at *floor*."""
    sym = 0.5 * (Theta + Theta.T)
    lam, vec = np.linalg.eigh(sym)
    return (vec * np.maximum(lam, floor)) @ vec.T


def closed_form_precision_mle(X) -> np.ndarray:
    """Inverse sample second moment of zero-mean data X (p × n).

    Raises ValueError when the moment is singular (rank-deficient data).
    """
    X = as_matrix(X, "X")
    if X.shape[1] < X.shape[0]:
        raise ValueError(f"need at least p={X.shape[0]} samples, got {X.shape[1]}")
    return precision_inverse(X @ X.T / X.shape[1])


def fit_precision_mle(
    X,
    delta: float,
    rng: np.random.Generator,
    n_steps: int = 200,
    inner_iters: int = 50,
    n_chains: int = 500,
    lr: float = 0.5,
    Theta0: Optional[np.ndarray] = None,
) -> PrecisionFit:
    """Stochastic gradient descent on the negative log-likelihood of N(0, Θ⁻¹).

    Each step advances the persistent chains by *inner_iters* Langevin
    iterations under the current Θ and applies Θ ← Θ − lr·ĝ(Θ).

    Raises
    ------
    RuntimeError
        If an iterate makes the Langevin step unstable.
    """
    X = as_matrix(X, "X")
    p = X.shape[0]
    Theta = np.eye(p) if Theta0 is None else as_matrix(Theta0, "Theta0").copy()
    chains = np.zeros((p, n_chains))
    fit = PrecisionFit(Theta=Theta, history=[Theta.copy()])

    for step in range(n_steps):
        run = langevin_run(Theta, delta, n_chains, inner_iters, rng, init=chains)
        chains = run.samples
        fit.grad_evals += run.grad_evals * n_chains
        Theta = project_spd(Theta - lr * mle_grad_estimate(X, chains))
        fit.history.append(Theta.copy())
        logger.debug("MLE step %d: ‖Θ‖_F = %.4g", step + 1, np.linalg.norm(Theta))

    fit.Theta = Theta
    logger.info("Langevin MLE: %d steps, %d gradient evaluations", n_steps, fit.grad_evals)
    return fit
