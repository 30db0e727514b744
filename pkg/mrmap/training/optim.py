"""Adam with decoupled weight decay, the w ≥ 0 projection and the step schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mrmap.model.params import LEARNABLES, ParamGradient, PotentialParams

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates per learnable and the step count."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: PotentialParams) -> "AdamState":
        return cls(
            m={k: np.zeros_like(a) for k, a in params.learnables().items()},
            v={k: np.zeros_like(a) for k, a in params.learnables().items()},
        )


def project_weights(params: PotentialParams) -> PotentialParams:
    """Clamp every w_j entry at 0, keeping φ convex."""
    return params.with_learnables({"layer_w": np.maximum(params.layer_w, 0.0)})


def adam_step(
    params: PotentialParams,
    state: AdamState,
    grads: ParamGradient,
    lr: float,
    weight_decay: float = 0.0,
) -> PotentialParams:
    """One bias-corrected Adam update; *state* is advanced in place.

    Order: moment update, Adam step, decay (param −= lr·wd·param), projection.
    """
    state.t += 1
    c1 = 1.0 - BETA1**state.t
    c2 = 1.0 - BETA2**state.t
    updated: dict[str, np.ndarray] = {}
    for name in LEARNABLES:
        param = getattr(params, name)
        g = getattr(grads, name)
        if g.shape != param.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {param.shape}")
        state.m[name] = BETA1 * state.m[name] + (1.0 - BETA1) * g
        state.v[name] = BETA2 * state.v[name] + (1.0 - BETA2) * g * g
        step = (state.m[name] / c1) / (np.sqrt(state.v[name] / c2) + EPS)
        new = param - lr * step
        if weight_decay:
            new = new - lr * weight_decay * param
        updated[name] = new
    return project_weights(params.with_learnables(updated))


def step_lr(lr0: float, factor: float, every: int, epoch: int) -> float:
    """lr₀·factor^⌊epoch/every⌋ for a zero-based *epoch*."""
    if every < 1 or epoch < 0:
        raise ValueError("need every >= 1 and epoch >= 0")
    return lr0 * factor ** (epoch // every)
