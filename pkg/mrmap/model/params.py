"""Learnable parameters, trajectories and parameter gradients.

PotentialParams – θ = (K, {K_j, b_j, w_j}, r, ω) plus hyperparameters
FlowTrajectory  – u₀ … u_ℓ and the terminal-consistency vector q
ParamGradient   – one array per learnable, congruent with PotentialParams
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterator, Optional

import numpy as np

# Names of the learnable arrays, in checkpoint / optimizer order.
LEARNABLES: tuple[str, ...] = ("K", "layer_K", "layer_b", "layer_w", "r", "W_omega", "b_omega")


@dataclass
class PotentialParams:
    """Parameters of the least-action potential and its flow.

    Layer parameters are stacked along the first axis: ``layer_K[j]`` is K_j
    (q × q), ``layer_b[j]`` is b_j and ``layer_w[j]`` is w_j (entries ≥ 0).
    """

    K: np.ndarray           # p × q decoder
    layer_K: np.ndarray     # ℓ × q × q
    layer_b: np.ndarray     # ℓ × q
    layer_w: np.ndarray     # ℓ × q
    r: np.ndarray           # q
    W_omega: np.ndarray     # q × q initializer weight
    b_omega: np.ndarray     # q initializer bias
    beta: float = 0.1
    h: float = 1.0
    sigma: float = 0.5
    cg_iters: int = 8

    def __post_init__(self) -> None:
        for name in LEARNABLES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        problems = self.shape_errors()
        if problems:
            raise ValueError("; ".join(problems))

    # ------------------------------------------------------------------ #
    # Dimensions
    # ------------------------------------------------------------------ #

    @property
    def p(self) -> int:
        return int(self.K.shape[0])

    @property
    def q(self) -> int:
        return int(self.K.shape[1])

    @property
    def ell(self) -> int:
        return int(self.layer_K.shape[0])

    def shape_errors(self) -> list[str]:
        """Return shape / hyperparameter violations (empty = consistent)."""
        errors: list[str] = []
        if self.K.ndim != 2:
            return [f"K must be 2-D, got shape {self.K.shape}"]
        p, q = self.K.shape
        ell = self.layer_K.shape[0] if self.layer_K.ndim == 3 else 0
        expected = {
            "layer_K": (ell, q, q),
            "layer_b": (ell, q),
            "layer_w": (ell, q),
            "r": (q,),
            "W_omega": (q, q),
            "b_omega": (q,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                errors.append(f"{name} has shape {actual}, expected {shape}")
        if ell < 1:
            errors.append("at least one layer is required (ell >= 1)")
        if q < p:
            errors.append(f"embedding dimension q={q} must be >= data dimension p={p}")
        for name in ("beta", "h", "sigma"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be positive, got {getattr(self, name)}")
        if self.cg_iters < 0:
            errors.append(f"cg_iters must be >= 0, got {self.cg_iters}")
        return errors

    def layer(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(K_j, b_j, w_j) for 0 ≤ j < ℓ."""
        if not 0 <= j < self.ell:
            raise IndexError(f"layer index {j} out of range 0..{self.ell - 1}")
        return self.layer_K[j], self.layer_b[j], self.layer_w[j]

    # ------------------------------------------------------------------ #
    # Learnable access
    # ------------------------------------------------------------------ #

    def learnables(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in LEARNABLES}

    def with_learnables(self, arrays: dict[str, np.ndarray]) -> "PotentialParams":
        return replace(self, **arrays)

    def copy(self) -> "PotentialParams":
        return self.with_learnables({k: v.copy() for k, v in self.learnables().items()})

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "beta": float(self.beta),
            "h": float(self.h),
            "sigma": float(self.sigma),
            "cg_iters": int(self.cg_iters),
        }

    def n_learnable(self) -> int:
        return sum(int(a.size) for a in self.learnables().values())

    # ------------------------------------------------------------------ #
    # Construction
    # ------------------------------------------------------------------ #

    @classmethod
    def zeros(
        cls, p: int, q: int, ell: int, K: Optional[np.ndarray] = None, **hyper: Any
    ) -> "PotentialParams":
        """All dynamics parameters zero; *K* defaults to the selector [I_p | 0]."""
        if K is None:
            K = np.eye(p, q)
        return cls(
            K=np.array(K, dtype=np.float64),
            layer_K=np.zeros((ell, q, q)),
            layer_b=np.zeros((ell, q)),
            layer_w=np.zeros((ell, q)),
            r=np.zeros(q),
            W_omega=np.zeros((q, q)),
            b_omega=np.zeros(q),
            **hyper,
        )

    @classmethod
    def initialize(
        cls,
        p: int,
        q: int,
        ell: int,
        rng: np.random.Generator,
        w_init: float = 1e-2,
        **hyper: Any,
    ) -> "PotentialParams":
        """K, K_j ~ N(0, 1/q); b_j = 0; w_j = w_init; r = 0; ω = 0 (so u₁ = u₀)."""
        scale = 1.0 / np.sqrt(q)
        return cls(
            K=scale * rng.standard_normal((p, q)),
            layer_K=scale * rng.standard_normal((ell, q, q)),
            layer_b=np.zeros((ell, q)),
            layer_w=np.full((ell, q), float(w_init)),
            r=np.zeros(q),
            W_omega=np.zeros((q, q)),
            b_omega=np.zeros(q),
            **hyper,
        )


@dataclass
class FlowTrajectory:
    """u has shape (ℓ+1, ..., q); block j is ``u[j]``.  Leading batch axes
    between the block axis and q are allowed.
    """

    u: np.ndarray
    q_vec: Optional[np.ndarray] = None
    tapes: Optional[dict[str, Any]] = field(default=None, repr=False, compare=False)

    @property
    def ell(self) -> int:
        return int(self.u.shape[0]) - 1

    @property
    def u_ell(self) -> np.ndarray:
        return self.u[-1]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.u)


@dataclass
class ParamGradient:
    """Gradient arrays named and shaped like the learnables of PotentialParams."""

    K: np.ndarray
    layer_K: np.ndarray
    layer_b: np.ndarray
    layer_w: np.ndarray
    r: np.ndarray
    W_omega: np.ndarray
    b_omega: np.ndarray

    @classmethod
    def zeros_like(cls, params: PotentialParams) -> "ParamGradient":
        return cls(**{k: np.zeros_like(v) for k, v in params.learnables().items()})

    def arrays(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.arrays().values())

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.arrays().values()])
