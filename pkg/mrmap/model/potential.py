"""The discrete least-action potential.

    φ(u, θ) = ½ Σ_{j=1..ℓ} ‖u_j − u_{j−1}‖² + h² Σ_{j=0..ℓ−1} w_jᵀ f(K_j u_j + b_j) + rᵀu_ℓ

with the squared-ReLU activation f(t) = ½ max(t, 0)², whose derivative is the
ReLU.  With w_j ≥ 0 every term is convex in u, so φ(·, θ) is convex.
"""

from __future__ import annotations

import numpy as np

from mrmap.data.operators import LatentDatum
from mrmap.model.params import FlowTrajectory, PotentialParams


def act(t):
    """f(t) = ½ max(t, 0)², elementwise."""
    pos = np.maximum(t, 0.0)
    return 0.5 * pos * pos


def act_prime(t):
    """f'(t) = max(t, 0); the subgradient at the kink is 0."""
    return np.maximum(t, 0.0)


def _blocks(params: PotentialParams, u) -> np.ndarray:
    arr = u.u if isinstance(u, FlowTrajectory) else np.asarray(u, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[0] != params.ell + 1 or arr.shape[-1] != params.q:
        raise ValueError(
            f"trajectory shape {arr.shape} does not match ell+1={params.ell + 1} blocks of q={params.q}"
        )
    return arr


def preactivation(params: PotentialParams, j: int, u_j: np.ndarray) -> np.ndarray:
    K_j, b_j, _ = params.layer(j)
    return u_j @ K_j.T + b_j


def layer_energy(params: PotentialParams, j: int, u_j: np.ndarray):
    """w_jᵀ f(K_j u_j + b_j); leading batch axes of *u_j* are kept."""
    u_j = np.asarray(u_j, dtype=np.float64)
    if u_j.shape[-1] != params.q:
        raise ValueError(f"u_j has length {u_j.shape[-1]}, expected {params.q}")
    _, _, w_j = params.layer(j)
    return np.sum(w_j * act(preactivation(params, j, u_j)), axis=-1)


def kinetic_energy(params: PotentialParams, u) -> np.ndarray:
    arr = _blocks(params, u)
    diffs = arr[1:] - arr[:-1]
    return 0.5 * np.sum(diffs * diffs, axis=(0, -1))


def potential_value(params: PotentialParams, u):
    """φ(u, θ) for a trajectory of ℓ+1 blocks (batched trajectories allowed)."""
    arr = _blocks(params, u)
    energy = sum(layer_energy(params, j, arr[j]) for j in range(params.ell))
    return kinetic_energy(params, arr) + params.h**2 * energy + arr[-1] @ params.r


def potential_grad_u(params: PotentialParams, u) -> np.ndarray:
    """∂φ/∂u_j for every block, same shape as the trajectory."""
    arr = _blocks(params, u)
    ell = params.ell
    grad = np.zeros_like(arr)
    diffs = arr[1:] - arr[:-1]
    grad[1:] += diffs
    grad[:-1] -= diffs
    for j in range(ell):
        K_j, _, w_j = params.layer(j)
        force = act_prime(preactivation(params, j, arr[j])) * w_j
        grad[j] += params.h**2 * (force @ K_j)
    grad[ell] += params.r
    return grad


def map_objective(params: PotentialParams, traj: FlowTrajectory | np.ndarray, datum: LatentDatum):
    """½‖PKu_ℓ − d‖² + β·φ(u): the explicit problem the flow approximates."""
    arr = _blocks(params, traj)
    residual = datum.operator.apply(arr[-1] @ params.K.T) - datum.d
    return 0.5 * np.sum(residual * residual, axis=-1) + params.beta * potential_value(params, arr)
