"""Closed-form Gaussian estimators used as oracles.

1-D model: x ~ N(0, θ) i.i.d., d = x + σε.

    θ̂*  = ‖x‖²/n                                  (moments / maximum likelihood)
    θ̂   = σ² dᵀx / (‖d‖² − dᵀx)                   (maximum recovery)
    θ̃   = conditional-likelihood comparison estimator
    x̂(d) = θ/(σ² + θ) · d,   v_θ = σ²θ/(σ² + θ)

Multivariate model: x ~ N(0, Θ⁻¹), d = Px + σε, with
H(Θ) = (PᵀP + σ²Θ⁻¹)⁻¹ and x̂ = H(Θ)Pᵀd.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from mrmap.data.operators import ForwardOperator
from mrmap.linalg.arrays import as_matrix, as_vector

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12


# --------------------------------------------------------------------------- #
# Cases
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class Gaussian1DCase:
    """θ (variance), σ (noise std), n clean samples x and their noisy d."""

    theta: float
    sigma: float
    x: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", as_vector(self.x, "x"))
        object.__setattr__(self, "d", as_vector(self.d, "d"))
        if self.x.size < 1 or self.x.shape != self.d.shape:
            raise ValueError(f"x and d must be non-empty and equal length, got {self.x.size}, {self.d.size}")
        if not (self.theta > 0 and self.sigma > 0):
            raise ValueError("theta and sigma must be positive")

    @classmethod
    def sample(cls, theta: float, sigma: float, n: int, rng: np.random.Generator) -> "Gaussian1DCase":
        x = math.sqrt(theta) * rng.standard_normal(n)
        d = x + sigma * rng.standard_normal(n)
        return cls(theta=theta, sigma=sigma, x=x, d=d)

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True, eq=False)
class PrecisionCase:
    """Symmetric positive definite precision Θ with noise level σ."""

    Theta: np.ndarray
    sigma: float

    def __post_init__(self) -> None:
        Theta = as_matrix(self.Theta, "Theta")
        if Theta.shape[0] != Theta.shape[1]:
            raise ValueError(f"Theta must be square, got {Theta.shape}")
        if np.max(np.abs(Theta - Theta.T), initial=0.0) > 1e-12:
            raise ValueError("Theta is not symmetric")
        try:
            cho_factor(Theta)
        except LinAlgError as exc:
            raise ValueError("Theta is not positive definite") from exc
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "Theta", Theta)

    @property
    def p(self) -> int:
        return int(self.Theta.shape[0])


# --------------------------------------------------------------------------- #
# 1-D estimators
# --------------------------------------------------------------------------- #


def theta_star_1d(x) -> float:
    """θ̂* = ‖x‖²/n; identical to the 1-D maximum-likelihood estimator."""
    x = as_vector(x, "x")
    if x.size == 0:
        raise ValueError("theta_star_1d needs at least one sample")
    return float(x @ x / x.size)


def theta_hat_1d(x, d, sigma: float) -> float:
    """θ̂ = σ² dᵀx / (‖d‖² − dᵀx).

    A non-positive value means the positivity constraint is violated (small n);
    it is returned unchanged and logged at debug level, never clamped.
    """
    x, d = as_vector(x, "x"), as_vector(d, "d")
    if x.shape != d.shape or x.size == 0:
        raise ValueError("x and d must be non-empty and equal length")
    dx = float(d @ x)
    den = float(d @ d) - dx
    if abs(den) < DEGENERATE_TOL:
        raise ValueError("degenerate sample: ‖d‖² − dᵀx is zero")
    value = sigma**2 * dx / den
    if value <= 0:
        logger.debug("theta_hat_1d is non-positive (%.6g) at n=%d", value, x.size)
    return value


def theta_tilde_1d(x, d, sigma: float) -> float:
    """Conditional-likelihood estimator θ̃."""
    x, d = as_vector(x, "x"), as_vector(d, "d")
    if x.shape != d.shape or x.size == 0:
        raise ValueError("x and d must be non-empty and equal length")
    n = x.size
    s2 = sigma**2
    xx, dd = float(x @ x), float(d @ d)
    den = 2.0 * (n * s2 + dd - xx)
    if abs(den) < DEGENERATE_TOL:
        raise ValueError("degenerate sample: theta_tilde denominator is zero")
    num = 2.0 * s2 * xx - n * s2**2 + s2 * math.sqrt(n**2 * s2**2 + 4.0 * xx * dd)
    return num / den


def map_1d(theta: float, sigma: float, d) -> np.ndarray:
    """x̂(d) = θ/(σ² + θ) · d."""
    return theta / (sigma**2 + theta) * np.asarray(d, dtype=np.float64)


def posterior_var_1d(theta: float, sigma: float) -> float:
    return sigma**2 * theta / (sigma**2 + theta)


def mse_map_1d(theta: float, sigma: float, x) -> float:
    """Frequentist MSE Σᵢ E‖x̂(dᵢ) − xᵢ‖² for fixed x."""
    x = as_vector(x, "x")
    s2 = sigma**2
    return float((s2**2 * (x @ x) + x.size * s2 * theta**2) / (s2 + theta) ** 2)


# --------------------------------------------------------------------------- #
# Multivariate
# --------------------------------------------------------------------------- #


def _operator_matrix(P, p: int) -> np.ndarray:
    mat = P.to_dense() if isinstance(P, ForwardOperator) else as_matrix(P, "P")
    if mat.shape[1] != p:
        raise ValueError(f"operator acts on R^{mat.shape[1]}, Theta on R^{p}")
    return mat


def _solve_H(Theta: np.ndarray, sigma: float, PtP: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """H(Θ)·rhs with H = (PᵀP + σ²Θ⁻¹)⁻¹."""
    try:
        Theta_inv = cho_solve(cho_factor(Theta), np.eye(Theta.shape[0]))
        return cho_solve(cho_factor(PtP + sigma**2 * Theta_inv), rhs)
    except LinAlgError as exc:
        raise RuntimeError("MAP system is singular") from exc


def map_multivariate(Theta, sigma: float, P, d) -> np.ndarray:
    """x̂ = (PᵀP + σ²Θ⁻¹)⁻¹Pᵀd by dense Cholesky."""
    case = PrecisionCase(Theta, sigma)
    Pm = _operator_matrix(P, case.p)
    d = as_vector(d, "d")
    if d.shape != (Pm.shape[0],):
        raise ValueError(f"d has length {d.size}, operator output is {Pm.shape[0]}")
    return _solve_H(case.Theta, sigma, Pm.T @ Pm, Pm.T @ d)


def bias_var_multivariate(Theta, sigma: float, P, x) -> tuple[np.ndarray, np.ndarray]:
    """Bias −σ²HΘ⁻¹x and covariance σ²HPᵀPH of x̂ given x and P."""
    case = PrecisionCase(Theta, sigma)
    Pm = _operator_matrix(P, case.p)
    x = as_vector(x, "x")
    PtP = Pm.T @ Pm
    H = _solve_H(case.Theta, sigma, PtP, np.eye(case.p))
    Theta_inv_x = cho_solve(cho_factor(case.Theta), x)
    bias = -sigma**2 * H @ Theta_inv_x
    cov = sigma**2 * H @ PtP @ H
    return bias, 0.5 * (cov + cov.T)


# --------------------------------------------------------------------------- #
# Likelihood gradient and score identity
# --------------------------------------------------------------------------- #


def mle_grad_estimate(X, Xtilde) -> np.ndarray:
    """ĝ(Θ) = XXᵀ/(2n) − X̃X̃ᵀ/(2N) for data X (p×n) and model samples X̃ (p×N)."""
    X, Xt = as_matrix(X, "X"), as_matrix(Xtilde, "Xtilde")
    if X.size == 0 or Xt.size == 0:
        raise ValueError("mle_grad_estimate needs non-empty sample matrices")
    if X.shape[0] != Xt.shape[0]:
        raise ValueError(f"row counts differ: {X.shape[0]} vs {Xt.shape[0]}")
    return X @ X.T / (2.0 * X.shape[1]) - Xt @ Xt.T / (2.0 * Xt.shape[1])


@dataclass(frozen=True)
class ScoreIdentity:
    """E ∂_θφ (analytic and Monte-Carlo) against −∂_θ log Z for φ = x²/(2θ)."""

    lhs: float
    rhs: float
    mc_lhs: Optional[float] = None
    mc_se: Optional[float] = None


def score_identity_check(
    theta: float, n_draws: int = 0, rng: Optional[np.random.Generator] = None
) -> ScoreIdentity:
    """Both sides of E ∂_θφ(x, θ) = −∂_θ log Z(θ) with θ the variance.

    ∂_θφ = −x²/(2θ²) and log Z = ½ log 2πθ, so both sides equal −1/(2θ).
    A positive *n_draws* adds a Monte-Carlo estimate of the left side and
    its standard error.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    lhs = -theta / (2.0 * theta**2)
    rhs = -0.5 / theta
    if n_draws <= 0:
        return ScoreIdentity(lhs=lhs, rhs=rhs)
    if rng is None:
        raise ValueError("a generator is required for the Monte-Carlo estimate")
    x = math.sqrt(theta) * rng.standard_normal(n_draws)
    terms = -(x * x) / (2.0 * theta**2)
    se = float(terms.std(ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else float("inf")
    return ScoreIdentity(lhs=lhs, rhs=rhs, mc_lhs=float(terms.mean()), mc_se=se)


# --------------------------------------------------------------------------- #
# Consistency harness
# --------------------------------------------------------------------------- #


def convergence_slope(ns: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(n)."""
    ns_arr = np.asarray(ns, dtype=np.float64)
    err = np.asarray(errors, dtype=np.float64)
    if ns_arr.size < 2 or ns_arr.shape != err.shape:
        raise ValueError("need at least two (n, error) pairs")
    if np.any(err <= 0) or np.any(ns_arr <= 0):
        raise ValueError("errors and sample sizes must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(ns_arr), np.log(err), 1)
    return float(slope)
