"""Builders for random parameters and observations shared by the tests."""

from __future__ import annotations

import numpy as np

from mrmap.data.operators import ForwardOperator, LatentDatum, sample_mask
from mrmap.data.rng import RngStream
from mrmap.model.params import PotentialParams


def generator(seed: int, stream_id: int = 0) -> np.random.Generator:
    return RngStream(seed, stream_id).generator()


def random_params(
    rng: np.random.Generator,
    p: int = 2,
    q: int = 4,
    ell: int = 3,
    beta: float = 0.5,
    h: float = 0.5,
    cg_iters: int = 3,
) -> PotentialParams:
    """Dense random parameters with every learnable active (w_j > 0)."""
    return PotentialParams(
        K=rng.standard_normal((p, q)),
        layer_K=rng.standard_normal((ell, q, q)) / np.sqrt(q),
        layer_b=0.5 * rng.standard_normal((ell, q)),
        layer_w=rng.uniform(0.1, 1.0, size=(ell, q)),
        r=0.3 * rng.standard_normal(q),
        W_omega=0.3 * rng.standard_normal((q, q)),
        b_omega=0.3 * rng.standard_normal(q),
        beta=beta,
        h=h,
        cg_iters=cg_iters,
    )


def random_datum(
    rng: np.random.Generator, x: np.ndarray, fraction: float = 1.0, sigma: float = 0.3
) -> LatentDatum:
    p = x.size
    op = ForwardOperator.identity(p) if fraction >= 1.0 else sample_mask(p, fraction, rng)
    return LatentDatum(d=op.apply(x) + sigma * rng.standard_normal(op.m), operator=op, sigma=sigma)
