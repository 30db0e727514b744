"""Regularized least-squares solves by conjugate gradients (CGLS).

Solves

    (AᵀA + βI) u = Aᵀb + β·shift

as the augmented least-squares problem ``[A; √βI] u ≈ [b; √β·shift]``.  The
iterates coincide with conjugate gradients on the normal equations but the
residual is kept in data space, which is better conditioned.

The operator is only known through ``apply_A`` / ``apply_At`` callbacks, so
index-selection masks never get materialized.  All arrays may carry leading
batch axes; inner products are taken along the last axis, so one call solves
an independent system per batch row.

The forward pass can record a tape, and :func:`cgls_backward` runs the exact
reverse pass through the unrolled, fixed-iteration program.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from mrmap.linalg.arrays import rowdot

logger = logging.getLogger(__name__)

LinearMap = Callable[[np.ndarray], np.ndarray]
# (input, output adjoint) -> input adjoint; may accumulate parameter adjoints.
AdjointMap = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_MAX_ITERS = 8
DEFAULT_TOL = 1e-10


# --------------------------------------------------------------------------- #
# Tape
# --------------------------------------------------------------------------- #


@dataclass
class CGLSStep:
    """Intermediates of one iteration, kept for the reverse pass."""

    p: np.ndarray
    Ap: np.ndarray
    gamma: np.ndarray       # ‖s‖² entering the step, shape (..., 1)
    delta: np.ndarray       # ‖Ap‖² + β‖p‖²
    alpha: np.ndarray
    rd_new: np.ndarray      # data-space residual after the step
    s_new: np.ndarray       # normal-equation residual after the step
    gamma_new: np.ndarray
    mu: np.ndarray


@dataclass
class CGLSTape:
    b: np.ndarray
    shift: np.ndarray
    s0: np.ndarray
    steps: list[CGLSStep] = field(default_factory=list)


@dataclass
class CGLSResult:
    """Solution plus per-iterate diagnostics.

    ``residual_norms[k]`` is the largest normal-equation residual norm over the
    batch after *k* iterations; ``lsq_residuals[k]`` is the summed augmented
    least-squares residual ‖b − Au‖² + β‖shift − u‖², which CGLS never increases.
    """

    x: np.ndarray
    iterations: int
    residual_norms: list[float]
    lsq_residuals: list[float]
    tape: Optional[CGLSTape] = None


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


# --------------------------------------------------------------------------- #
# Forward
# --------------------------------------------------------------------------- #


def cgls(
    apply_A: LinearMap,
    apply_At: LinearMap,
    b: np.ndarray,
    beta: float,
    shift: Optional[np.ndarray] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    record: bool = False,
) -> CGLSResult:
    """Run CGLS from a zero start.

    Stops after *max_iters* iterations or once every batch row has a
    normal-equation residual norm ≤ *tol* (``tol=0`` gives a fixed budget).

    Raises
    ------
    ValueError
        If ``beta <= 0`` or the operator, *b* and *shift* shapes disagree.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if max_iters < 0 or tol < 0:
        raise ValueError("max_iters and tol must be non-negative")

    b = np.asarray(b, dtype=np.float64)
    Atb = np.asarray(apply_At(b), dtype=np.float64)
    if shift is None:
        shift = np.zeros_like(Atb)
    else:
        shift = np.asarray(shift, dtype=np.float64)
        if shift.shape != Atb.shape:
            raise ValueError(
                f"shift shape {shift.shape} does not match solution shape {Atb.shape}"
            )

    x = np.zeros_like(Atb)
    rd = b.copy()
    z = shift.copy()
    s = Atb + beta * shift
    p = s.copy()
    gamma = rowdot(s, s)

    tape = CGLSTape(b=b, shift=shift, s0=s) if record else None
    norms = [float(np.sqrt(gamma.max()))]
    lsq = [float(np.sum(rd * rd) + beta * np.sum(z * z))]

    it = 0
    while it < max_iters and norms[-1] > tol:
        Ap = apply_A(p)
        if Ap.shape != b.shape:
            raise ValueError(f"operator output shape {Ap.shape} does not match b {b.shape}")
        delta = rowdot(Ap, Ap) + beta * rowdot(p, p)
        alpha = _safe_ratio(gamma, delta)
        x = x + alpha * p
        rd_new = rd - alpha * Ap
        z = z - alpha * p
        s_new = apply_At(rd_new) + beta * z
        gamma_new = rowdot(s_new, s_new)
        mu = _safe_ratio(gamma_new, gamma)
        if tape is not None:
            tape.steps.append(
                CGLSStep(
                    p=p, Ap=Ap, gamma=gamma, delta=delta, alpha=alpha,
                    rd_new=rd_new, s_new=s_new, gamma_new=gamma_new, mu=mu,
                )
            )
        p = s_new + mu * p
        rd, gamma = rd_new, gamma_new
        it += 1
        norms.append(float(np.sqrt(gamma.max())))
        lsq.append(float(np.sum(rd * rd) + beta * np.sum(z * z)))

    return CGLSResult(x=x, iterations=it, residual_norms=norms, lsq_residuals=lsq, tape=tape)


def solve_regularized(
    apply_A: LinearMap,
    apply_At: LinearMap,
    b: np.ndarray,
    beta: float,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Return u ≈ (AᵀA + βI)⁻¹Aᵀb."""
    return cgls(apply_A, apply_At, b, beta, max_iters=max_iters, tol=tol).x


def solve_regularized_shifted(
    apply_A: LinearMap,
    apply_At: LinearMap,
    b: np.ndarray,
    beta: float,
    shift: np.ndarray,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Return u ≈ (AᵀA + βI)⁻¹(Aᵀb + β·shift)."""
    return cgls(apply_A, apply_At, b, beta, shift=shift, max_iters=max_iters, tol=tol).x


# --------------------------------------------------------------------------- #
# Reverse
# --------------------------------------------------------------------------- #


def cgls_backward(
    tape: CGLSTape,
    beta: float,
    x_bar: np.ndarray,
    vjp_A: AdjointMap,
    vjp_At: AdjointMap,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate the adjoint of the returned solution back through the solve.

    ``vjp_A(v, y_bar)`` is called for every forward product ``y = A v`` and
    must return ``Aᵀ y_bar``; ``vjp_At(y, w_bar)`` likewise for ``w = Aᵀ y``
    and must return ``A w_bar``.  Both may accumulate operator-parameter
    adjoints as a side effect.

    Returns
    -------
    (b_bar, shift_bar)
    """
    x_bar = np.asarray(x_bar, dtype=np.float64)
    rd_bar = np.zeros_like(tape.b)
    z_bar = np.zeros_like(tape.shift)
    p_bar = np.zeros_like(tape.shift)
    gamma_bar = np.zeros(tape.shift.shape[:-1] + (1,))

    for st in reversed(tape.steps):
        # p' = s' + μp
        s_bar = p_bar.copy()
        mu_bar = rowdot(p_bar, st.p)
        p_prev_bar = st.mu * p_bar
        # μ = γ'/γ
        g_ok = st.gamma > 0
        g_safe = np.where(g_ok, st.gamma, 1.0)
        gamma_new_bar = gamma_bar + np.where(g_ok, mu_bar / g_safe, 0.0)
        gamma_prev_bar = np.where(g_ok, -mu_bar * st.gamma_new / g_safe**2, 0.0)
        # γ' = ‖s'‖²
        s_bar += 2.0 * gamma_new_bar * st.s_new
        # s' = Aᵀrd' + βz'
        rd_bar = rd_bar + vjp_At(st.rd_new, s_bar)
        z_bar = z_bar + beta * s_bar
        # x' = x + αp,  rd' = rd − αAp,  z' = z − αp
        alpha_bar = rowdot(x_bar, st.p) - rowdot(z_bar, st.p) - rowdot(rd_bar, st.Ap)
        p_prev_bar += st.alpha * (x_bar - z_bar)
        Ap_bar = -st.alpha * rd_bar
        # α = γ/δ
        d_ok = st.delta > 0
        d_safe = np.where(d_ok, st.delta, 1.0)
        gamma_prev_bar += np.where(d_ok, alpha_bar / d_safe, 0.0)
        delta_bar = np.where(d_ok, -alpha_bar * st.gamma / d_safe**2, 0.0)
        # δ = ‖Ap‖² + β‖p‖²
        Ap_bar += 2.0 * delta_bar * st.Ap
        p_prev_bar += 2.0 * beta * delta_bar * st.p
        # Ap = A p
        p_prev_bar += vjp_A(st.p, Ap_bar)

        p_bar = p_prev_bar
        gamma_bar = gamma_prev_bar

    # Start: rd = b, z = shift, s = Aᵀb + β·shift, p = s, γ = ‖s‖²
    s_bar = p_bar + 2.0 * gamma_bar * tape.s0
    b_bar = rd_bar + vjp_At(tape.b, s_bar)
    shift_bar = z_bar + beta * s_bar
    return b_bar, shift_bar


# --------------------------------------------------------------------------- #
# Dense oracle
# --------------------------------------------------------------------------- #


def dense_regularized_solve(
    A: np.ndarray,
    b: np.ndarray,
    beta: float,
    shift: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Direct Cholesky solve of (AᵀA + βI)u = Aᵀb + β·shift."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    A = np.asarray(A, dtype=np.float64)
    rhs = A.T @ np.asarray(b, dtype=np.float64)
    if shift is not None:
        rhs = rhs + beta * np.asarray(shift, dtype=np.float64)
    M = A.T @ A + beta * np.eye(A.shape[1])
    return cho_solve(cho_factor(M), rhs)
