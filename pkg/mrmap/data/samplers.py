"""Random generation: Gaussian mixtures, Gaussians and the Langevin iteration.

MixtureSpec          – equal-weight mixture of unit-covariance Gaussians
sample_mixture       – draws (dim × n) samples from a MixtureSpec
mixture_log_density  – log-sum-exp stabilized log p_G(x)
langevin_run         – X_{k+1} = X_k − (δ²/2)ΘX_k + δε_k on a precision Θ
ar1_stationary_cov   – exact stationary covariance of that iteration
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

from mrmap.linalg.arrays import as_matrix

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------- #
# Gaussian mixture
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Component centres, one per row (count × dim)."""

    means: np.ndarray

    def __post_init__(self) -> None:
        means = as_matrix(self.means, "mixture means")
        if means.shape[0] < 1:
            raise ValueError("a mixture needs at least one component")
        object.__setattr__(self, "means", means)

    @classmethod
    def ring(cls, count: int = 6, radius: float = 8.0) -> "MixtureSpec":
        """*count* centres on a circle, at angles k·360°/count."""
        angles = 2.0 * np.pi * np.arange(count) / count
        return cls(np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1))

    @property
    def count(self) -> int:
        return int(self.means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])


def sample_mixture_labeled(
    spec: MixtureSpec, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Return (samples (dim × n), component label per column)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels = rng.integers(0, spec.count, size=n)
    noise = rng.standard_normal((spec.dim, n))
    return spec.means[labels].T + noise, labels


def sample_mixture(spec: MixtureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw *n* columns: pick a component uniformly, then N(μ, I)."""
    return sample_mixture_labeled(spec, n, rng)[0]


def mixture_log_density(spec: MixtureSpec, x: np.ndarray) -> np.ndarray | float:
    """log((1/c)·Σ N(x; μᵢ, I)) for a vector *x* or for each column of a matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    cols = x[:, None] if single else x
    if cols.shape[0] != spec.dim:
        raise ValueError(f"points have dimension {cols.shape[0]}, mixture has {spec.dim}")
    sq = np.sum((cols[None, :, :] - spec.means[:, :, None]) ** 2, axis=1)  # (count, n)
    log_comp = -0.5 * sq - 0.5 * spec.dim * math.log(2.0 * math.pi)
    out = logsumexp(log_comp, axis=0) - math.log(spec.count)
    return float(out[0]) if single else out


def nearest_component(spec: MixtureSpec, X: np.ndarray) -> np.ndarray:
    """Index of the closest mean for each column of *X*."""
    sq = np.sum((X[None, :, :] - spec.means[:, :, None]) ** 2, axis=1)
    return np.argmin(sq, axis=0)


# --------------------------------------------------------------------------- #
# Gaussians from a precision matrix
# --------------------------------------------------------------------------- #


def sample_gaussian_precision(
    Theta: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact N(0, Θ⁻¹) samples (p × n) via the Cholesky factor of Θ."""
    Theta = as_matrix(Theta, "Theta")
    L = np.linalg.cholesky(Theta)
    Z = rng.standard_normal((Theta.shape[0], n))
    # Θ = LLᵀ, so x = L⁻ᵀz has covariance Θ⁻¹.
    return np.linalg.solve(L.T, Z)


def power_iteration(M: np.ndarray, iters: int = 200, tol: float = 1e-12) -> float:
    """Largest-magnitude eigenvalue estimate of a symmetric matrix."""
    M = as_matrix(M, "matrix")
    v = np.ones(M.shape[0]) / math.sqrt(M.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = M @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_lam = float(v @ M @ v)
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
            return new_lam
        lam = new_lam
    return lam


def check_langevin_stability(Theta: np.ndarray, delta: float) -> float:
    """Raise unless (δ²/2)·λ_max(Θ) < 2; return the eigenvalue estimate."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    lam = power_iteration(Theta)
    if not 0.5 * delta**2 * lam < 2.0:
        raise RuntimeError(
            f"Langevin step unstable: (δ²/2)·λ_max = {0.5 * delta**2 * lam:.6g} >= 2 "
            f"(λ_max ≈ {lam:.6g}, δ = {delta})"
        )
    return lam


# --------------------------------------------------------------------------- #
# Langevin iteration
# --------------------------------------------------------------------------- #


@dataclass
class LangevinRun:
    samples: np.ndarray                                   # p × n_chains
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    grad_evals: int = 0                                   # ∇φ evaluations per chain


def langevin_run(
    Theta: np.ndarray,
    delta: float,
    n_chains: int,
    n_iters: int,
    rng: np.random.Generator,
    init: Optional[np.ndarray] = None,
    record_at: Iterable[int] = (),
    noise: bool = True,
) -> LangevinRun:
    """Run ``n_chains`` independent unadjusted Langevin chains for φ = ½xᵀΘx.

    Snapshots are copies of the chain matrix after each iteration count in
    *record_at* (0 records *init*).  ``noise=False`` drops the ε term.

    Raises
    ------
    RuntimeError
        If the step violates (δ²/2)·λ_max(Θ) < 2.
    """
    Theta = as_matrix(Theta, "Theta")
    p = Theta.shape[0]
    if n_iters < 0 or n_chains < 1:
        raise ValueError("need n_iters >= 0 and n_chains >= 1")
    check_langevin_stability(Theta, delta)

    X = np.zeros((p, n_chains)) if init is None else np.array(init, dtype=np.float64)
    if X.shape != (p, n_chains):
        raise ValueError(f"init has shape {X.shape}, expected {(p, n_chains)}")

    wanted = {int(k) for k in record_at if 0 <= int(k) <= n_iters}
    snapshots: dict[int, np.ndarray] = {}
    if 0 in wanted:
        snapshots[0] = X.copy()

    A = np.eye(p) - 0.5 * delta**2 * Theta
    for k in range(1, n_iters + 1):
        X = A @ X
        if noise:
            X += delta * rng.standard_normal((p, n_chains))
        if k in wanted:
            snapshots[k] = X.copy()

    logger.debug("Langevin: %d chains × %d iterations (δ=%g)", n_chains, n_iters, delta)
    return LangevinRun(samples=X, snapshots=snapshots, grad_evals=n_iters)


def ar1_stationary_cov(
    Theta: np.ndarray, delta: float, tol: float = 1e-12, max_doublings: int = 200
) -> np.ndarray:
    """Solve Σ = AΣAᵀ + δ²I, A = I − (δ²/2)Θ, by the doubled fixed-point series.

    Σ = δ² Σ_k AᵏAᵏᵀ is summed in log₂ steps: S_{2n} = S_n + AⁿS_nAⁿᵀ.
    """
    Theta = as_matrix(Theta, "Theta")
    check_langevin_stability(Theta, delta)
    p = Theta.shape[0]
    A = np.eye(p) - 0.5 * delta**2 * Theta
    S = delta**2 * np.eye(p)
    An = A.copy()
    for _ in range(max_doublings):
        inc = An @ S @ An.T
        S = S + inc
        if np.max(np.abs(inc)) <= tol * np.max(np.abs(S)):
            return 0.5 * (S + S.T)
        An = An @ An
    raise RuntimeError("stationary covariance series did not converge")


def ar1_variance_fraction(Theta: np.ndarray, delta: float, k: int) -> np.ndarray:
    """Fraction of the stationary variance reached after *k* steps from 0.

    Returned per eigendirection of Θ (ascending eigenvalue order):
    1 − a^{2k} with a = 1 − δ²λ/2.
    """
    lam = np.linalg.eigvalsh(as_matrix(Theta, "Theta"))
    a = 1.0 - 0.5 * delta**2 * lam
    return 1.0 - a ** (2 * k)


def precision_inverse(Theta: np.ndarray) -> np.ndarray:
    """Θ⁻¹ via Cholesky (raises if Θ is not positive definite)."""
    Theta = as_matrix(Theta, "Theta")
    return cho_solve(cho_factor(Theta), np.eye(Theta.shape[0]))
