"""Reverse-mode gradients of the training loss through the unrolled flow.

The forward program is fixed once the CG budget is fixed: two CGLS solves,
the tanh initializer and ℓ−1 hyperbolic steps.  :func:`loss_and_grad` runs
it with tapes recorded and walks it backwards by hand.  Layer 0 enters the
potential but not the recurrence, so its gradient is identically zero.

For batches the loss is the batch mean, so gradients are too.
"""

from __future__ import annotations

import logging

import numpy as np

from mrmap.linalg.solvers import cgls_backward
from mrmap.model.flow import Latent, decode, min_preactivation_gap, run_flow
from mrmap.model.params import LEARNABLES, ParamGradient, PotentialParams
from mrmap.model.potential import act_prime, preactivation
from mrmap.training.losses import LossTerms, compute_losses, total_loss

logger = logging.getLogger(__name__)


def _outer_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Σ over leading axes of a ⊗ b."""
    return a.reshape(-1, a.shape[-1]).T @ b.reshape(-1, b.shape[-1])


def _lead_sum(a: np.ndarray) -> np.ndarray:
    return a.reshape(-1, a.shape[-1]).sum(axis=0)


def _projected_vjps(params: PotentialParams, datum: Latent, acc: ParamGradient):
    """Adjoint callbacks for A = P∘K that accumulate ∂/∂K into *acc*."""
    op, K = datum.operator, params.K

    def vjp_A(v: np.ndarray, y_bar: np.ndarray) -> np.ndarray:
        t = op.apply_adjoint(y_bar)
        acc.K += _outer_sum(t, v)
        return t @ K

    def vjp_At(y: np.ndarray, w_bar: np.ndarray) -> np.ndarray:
        acc.K += _outer_sum(op.apply_adjoint(y), w_bar)
        return op.apply(w_bar @ K.T)

    return vjp_A, vjp_At


def loss_terms_and_grad(
    params: PotentialParams,
    datum: Latent,
    x_true: np.ndarray,
    alpha: float = 1.0,
    gamma: float = 1.0,
) -> tuple[LossTerms, ParamGradient]:
    """Batch-mean loss terms and the exact gradient of R_e + αR_p + γR_c."""
    x_true = np.asarray(x_true, dtype=np.float64)
    traj = run_flow(params, datum, record=True)
    terms = LossTerms.from_samples(*compute_losses(params, traj, datum, x_true))
    n_rows = 1 if x_true.ndim == 1 else int(np.prod(x_true.shape[:-1]))
    scale = 1.0 / n_rows

    acc = ParamGradient.zeros_like(params)
    vjp_A, vjp_At = _projected_vjps(params, datum, acc)
    u = traj.u
    ell = params.ell
    u_bar = np.zeros_like(u)
    op = datum.operator

    # x̂ = K u_ℓ
    err = decode(params, traj.u_ell) - x_true
    x_hat_bar = scale * (2.0 * err + 2.0 * alpha * op.apply_adjoint(op.apply(err)))
    acc.K += _outer_sum(x_hat_bar, u[ell])
    u_bar[ell] += x_hat_bar @ params.K

    # R_c = ‖q − u_ℓ‖², q = solve(d, shift = u_{ℓ−1} + r)
    q_bar = scale * 2.0 * gamma * (traj.q_vec - traj.u_ell)
    u_bar[ell] -= q_bar
    _, shift_bar = cgls_backward(traj.tapes["terminal"], params.beta, q_bar, vjp_A, vjp_At)
    u_bar[ell - 1] += shift_bar
    acc.r += _lead_sum(shift_bar)

    # u_{j+1} = 2u_j − u_{j−1} + h² K_jᵀ(f'(z_j) ⊙ w_j),  z_j = K_j u_j + b_j
    for j in range(ell - 1, 0, -1):
        K_j, _, w_j = params.layer(j)
        nxt = u_bar[j + 1]
        u_bar[j] += 2.0 * nxt
        u_bar[j - 1] -= nxt
        z = preactivation(params, j, u[j])
        relu = act_prime(z)
        g = params.h**2 * nxt
        acc.layer_K[j] += _outer_sum(relu * w_j, g)
        t_bar = g @ K_j.T
        acc.layer_w[j] += _lead_sum(relu * t_bar)
        z_bar = (z > 0) * w_j * t_bar
        acc.layer_K[j] += _outer_sum(z_bar, u[j])
        acc.layer_b[j] += _lead_sum(z_bar)
        u_bar[j] += z_bar @ K_j

    # u₁ = u₀ + tanh(W_ω u₀ + b_ω)
    th = np.tanh(u[0] @ params.W_omega.T + params.b_omega)
    a_bar = u_bar[1] * (1.0 - th * th)
    acc.W_omega += _outer_sum(a_bar, u[0])
    acc.b_omega += _lead_sum(a_bar)
    u_bar[0] += u_bar[1] + a_bar @ params.W_omega

    # u₀ = solve(d)
    cgls_backward(traj.tapes["embed"], params.beta, u_bar[0], vjp_A, vjp_At)

    return terms, acc


def loss_and_grad(
    params: PotentialParams,
    datum: Latent,
    x_true: np.ndarray,
    alpha: float = 1.0,
    gamma: float = 1.0,
) -> tuple[float, ParamGradient]:
    terms, grad = loss_terms_and_grad(params, datum, x_true, alpha, gamma)
    return terms.total(alpha, gamma), grad


def loss_value(
    params: PotentialParams,
    datum: Latent,
    x_true: np.ndarray,
    alpha: float = 1.0,
    gamma: float = 1.0,
) -> float:
    """Forward-only batch-mean loss."""
    traj = run_flow(params, datum)
    R_e, R_p, R_c = compute_losses(params, traj, datum, x_true)
    return float(np.mean(total_loss(R_e, R_p, R_c, alpha, gamma)))


# --------------------------------------------------------------------------- #
# Finite-difference check
# --------------------------------------------------------------------------- #


def fd_gradient(
    params: PotentialParams,
    datum: Latent,
    x_true: np.ndarray,
    alpha: float = 1.0,
    gamma: float = 1.0,
    step: float = 1e-6,
) -> ParamGradient:
    """Central differences of :func:`loss_value` for every learnable entry."""
    out = ParamGradient.zeros_like(params)
    base = params.learnables()
    for name in LEARNABLES:
        target = getattr(out, name)
        for idx in np.ndindex(base[name].shape):
            values = []
            for sign in (1.0, -1.0):
                arr = base[name].copy()
                arr[idx] += sign * step
                values.append(loss_value(params.with_learnables({name: arr}), datum, x_true, alpha, gamma))
            target[idx] = (values[0] - values[1]) / (2.0 * step)
    return out


def fd_check(
    params: PotentialParams,
    datum: Latent,
    x_true: np.ndarray,
    alpha: float = 1.0,
    gamma: float = 1.0,
    step: float = 1e-6,
    atol: float = 1e-8,
) -> float:
    """Max relative error between the analytic and central-difference gradients.

    Relative error per entry is |a − f| / max(|a|, |f|, 1e-8); entries with
    |a − f| ≤ *atol* count as exact.  Near a ReLU kink the value may be large;
    it is reported, not asserted.
    """
    if not 1e-8 <= step <= 1e-4:
        raise ValueError(f"step must be in [1e-8, 1e-4], got {step}")
    _, analytic = loss_and_grad(params, datum, x_true, alpha, gamma)
    numeric = fd_gradient(params, datum, x_true, alpha, gamma, step)
    a, f = analytic.flat(), numeric.flat()
    diff = np.abs(a - f)
    rel = diff / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-8)
    rel[diff <= atol] = 0.0
    worst = float(rel.max(initial=0.0))
    logger.debug(
        "fd_check: max relative error %.3e over %d entries (kink distance %.3e)",
        worst, a.size, min_preactivation_gap(params, run_flow(params, datum)),
    )
    return worst
