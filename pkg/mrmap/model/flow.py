"""Forward pass of the hyperbolic network.

Pipeline
--------
1. u₀ = (KᵀPᵀPK + βI)⁻¹KᵀPᵀd                      (data-fitting solve)
2. u₁ = u₀ + tanh(W_ω u₀ + b_ω)                   (learned initializer)
3. u_{j+1} = 2u_j − u_{j−1} + h²K_jᵀ(f'(K_j u_j + b_j) ⊙ w_j),  j = 1..ℓ−1
4. q = (KᵀPᵀPK + βI)⁻¹(KᵀPᵀd + βu_{ℓ−1} + βr)     (terminal solve)

Both solves run a fixed CG budget (``params.cg_iters``) so the forward
program has a fixed unrolled form for differentiation.  Every function
accepts a single :class:`LatentDatum` or a stacked :class:`LatentBatch`;
batched arrays carry the batch on the axis before q.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from mrmap.data.operators import LatentBatch, LatentDatum
from mrmap.linalg.solvers import CGLSResult, cgls
from mrmap.model.params import FlowTrajectory, PotentialParams
from mrmap.model.potential import act_prime, preactivation

Latent = Union[LatentDatum, LatentBatch]


def _check_latent(params: PotentialParams, datum: Latent) -> None:
    if datum.operator.p != params.p:
        raise ValueError(f"operator input dimension {datum.operator.p} != model p={params.p}")


def projected_maps(params: PotentialParams, datum: Latent):
    """(A, Aᵀ) callbacks for A = P∘K."""
    op, K = datum.operator, params.K
    return (lambda v: op.apply(v @ K.T)), (lambda y: op.apply_adjoint(y) @ K)


def embed_solve(
    params: PotentialParams,
    datum: Latent,
    shift: np.ndarray | None = None,
    record: bool = False,
) -> CGLSResult:
    """Fixed-budget solve of (KᵀPᵀPK + βI)u = KᵀPᵀd + β·shift."""
    _check_latent(params, datum)
    apply_A, apply_At = projected_maps(params, datum)
    return cgls(
        apply_A, apply_At, datum.d, params.beta,
        shift=shift, max_iters=params.cg_iters, tol=0.0, record=record,
    )


def initial_embed(params: PotentialParams, datum: Latent) -> np.ndarray:
    """u₀ = (KᵀPᵀPK + βI)⁻¹KᵀPᵀd."""
    return embed_solve(params, datum).x


def initialize_u1(params: PotentialParams, u0: np.ndarray) -> np.ndarray:
    """u₁ = u₀ + tanh(W_ω u₀ + b_ω); the correction is bounded by 1 per entry."""
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape[-1] != params.q:
        raise ValueError(f"u0 has length {u0.shape[-1]}, expected {params.q}")
    return u0 + np.tanh(u0 @ params.W_omega.T + params.b_omega)


def layer_force(params: PotentialParams, j: int, u_j: np.ndarray) -> np.ndarray:
    """h²·K_jᵀ(f'(K_j u_j + b_j) ⊙ w_j)."""
    K_j, _, w_j = params.layer(j)
    return params.h**2 * ((act_prime(preactivation(params, j, u_j)) * w_j) @ K_j)


def hyperbolic_step(
    params: PotentialParams, j: int, u_j: np.ndarray, u_jm1: np.ndarray
) -> np.ndarray:
    """u_{j+1} = 2u_j − u_{j−1} + h²K_jᵀ(f'(K_j u_j + b_j) ⊙ w_j) for 1 ≤ j ≤ ℓ−1."""
    if not 1 <= j <= params.ell - 1:
        raise ValueError(f"hyperbolic step index {j} out of range 1..{params.ell - 1}")
    u_j = np.asarray(u_j, dtype=np.float64)
    u_jm1 = np.asarray(u_jm1, dtype=np.float64)
    if u_j.shape != u_jm1.shape or u_j.shape[-1] != params.q:
        raise ValueError(f"block shapes {u_j.shape} / {u_jm1.shape} do not match q={params.q}")
    return 2.0 * u_j - u_jm1 + layer_force(params, j, u_j)


def run_flow(params: PotentialParams, datum: Latent, record: bool = False) -> FlowTrajectory:
    """Algorithm: embed, initialize, propagate, terminal solve.

    With ``record=True`` the CG tapes of both solves are attached to the
    trajectory for the reverse pass.
    """
    first = embed_solve(params, datum, record=record)
    blocks = [first.x, initialize_u1(params, first.x)]
    for j in range(1, params.ell):
        blocks.append(hyperbolic_step(params, j, blocks[j], blocks[j - 1]))
    terminal = embed_solve(params, datum, shift=blocks[-2] + params.r, record=record)
    tapes = {"embed": first.tape, "terminal": terminal.tape} if record else None
    return FlowTrajectory(u=np.stack(blocks), q_vec=terminal.x, tapes=tapes)


def decode(params: PotentialParams, u_ell: np.ndarray) -> np.ndarray:
    """x̂ = K·u_ℓ."""
    u_ell = np.asarray(u_ell, dtype=np.float64)
    if u_ell.shape[-1] != params.q:
        raise ValueError(f"u_ell has length {u_ell.shape[-1]}, expected {params.q}")
    return u_ell @ params.K.T


def recover(params: PotentialParams, datum: Latent) -> np.ndarray:
    """MAP recovery x̂ = K·u_ℓ of the data behind *datum*."""
    return decode(params, run_flow(params, datum).u_ell)


def data_fit(params: PotentialParams, datum: Latent) -> np.ndarray:
    """Data-fitted prediction K·u₀, before the learned correction."""
    return decode(params, initial_embed(params, datum))


# --------------------------------------------------------------------------- #
# Diagnostics
# --------------------------------------------------------------------------- #


def interior_residual(params: PotentialParams, traj: FlowTrajectory) -> float:
    """Largest violation of the hyperbolic recurrence over interior blocks."""
    worst = 0.0
    for j in range(1, params.ell):
        expected = 2.0 * traj.u[j] - traj.u[j - 1] + layer_force(params, j, traj.u[j])
        worst = max(worst, float(np.max(np.abs(traj.u[j + 1] - expected))))
    return worst


def consistency_gap(traj: FlowTrajectory) -> np.ndarray:
    """‖q − u_ℓ‖ (per batch row)."""
    diff = traj.q_vec - traj.u_ell
    return np.sqrt(np.sum(diff * diff, axis=-1))


def min_preactivation_gap(params: PotentialParams, traj: FlowTrajectory) -> float:
    """Smallest |K_j u_j + b_j| over the layers the flow uses (∞ if none)."""
    gaps = [
        float(np.min(np.abs(preactivation(params, j, traj.u[j]))))
        for j in range(1, params.ell)
    ]
    return min(gaps, default=float("inf"))
