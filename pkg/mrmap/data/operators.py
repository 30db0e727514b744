"""Forward operators P and latent data d = Px + ε.

ForwardOperator  – a single projection (identity, index mask or dense matrix)
OperatorBatch    – B operators of the same kind and output size, applied row-wise
LatentDatum      – one noisy projected observation
LatentBatch      – B observations stacked for the batched flow
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from mrmap.linalg.arrays import as_matrix, as_vector


class OperatorKind(str, Enum):
    IDENTITY = "identity"
    MASK = "mask"
    DENSE = "dense"


def _check_last(arr: np.ndarray, size: int, what: str) -> None:
    if arr.ndim == 0 or arr.shape[-1] != size:
        raise ValueError(f"{what} length {arr.shape[-1] if arr.ndim else 0} != expected {size}")


# --------------------------------------------------------------------------- #
# Single operator
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class ForwardOperator:
    """Projection from R^p to R^m.

    Masks store strictly increasing index lists; they are never expanded to
    dense matrices on the apply path.
    """

    kind: OperatorKind
    p: int
    indices: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    @classmethod
    def identity(cls, p: int) -> "ForwardOperator":
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return cls(OperatorKind.IDENTITY, p)

    @classmethod
    def mask(cls, indices: Sequence[int], p: int) -> "ForwardOperator":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("mask needs a non-empty 1-D index list")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("mask indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= p:
            raise ValueError(f"mask indices out of range 0..{p - 1}")
        idx.setflags(write=False)
        return cls(OperatorKind.MASK, p, indices=idx)

    @classmethod
    def dense(cls, matrix) -> "ForwardOperator":
        mat = as_matrix(matrix, "operator matrix")
        mat.setflags(write=False)
        return cls(OperatorKind.DENSE, mat.shape[1], matrix=mat)

    @property
    def m(self) -> int:
        if self.kind is OperatorKind.MASK:
            return int(self.indices.size)
        if self.kind is OperatorKind.DENSE:
            return int(self.matrix.shape[0])
        return self.p

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return Px (gather for masks); leading axes of *x* are kept."""
        x = np.asarray(x, dtype=np.float64)
        _check_last(x, self.p, "input")
        if self.kind is OperatorKind.MASK:
            return x[..., self.indices]
        if self.kind is OperatorKind.DENSE:
            return x @ self.matrix.T
        return x.copy()

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        """Return Pᵀy (scatter into zeros for masks)."""
        y = np.asarray(y, dtype=np.float64)
        _check_last(y, self.m, "adjoint input")
        if self.kind is OperatorKind.MASK:
            out = np.zeros(y.shape[:-1] + (self.p,))
            out[..., self.indices] = y
            return out
        if self.kind is OperatorKind.DENSE:
            return y @ self.matrix
        return y.copy()

    def to_dense(self) -> np.ndarray:
        """Materialize P as an m×p matrix (oracles and tests only)."""
        if self.kind is OperatorKind.DENSE:
            return np.array(self.matrix)
        eye = np.eye(self.p)
        if self.kind is OperatorKind.MASK:
            return eye[self.indices]
        return eye

    def to_dict(self) -> dict:
        data: dict = {"kind": self.kind.value, "p": self.p}
        if self.indices is not None:
            data["indices"] = [int(i) for i in self.indices]
        if self.matrix is not None:
            data["matrix"] = self.matrix.tolist()
        return data


# --------------------------------------------------------------------------- #
# Batched operators
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class OperatorBatch:
    """B operators of one kind, applied to the rows of a (B, p) array."""

    kind: OperatorKind
    p: int
    size: int
    indices: Optional[np.ndarray] = None    # (B, m) for masks
    matrices: Optional[np.ndarray] = None   # (B, m, p) for dense

    @classmethod
    def stack(cls, ops: Sequence[ForwardOperator]) -> "OperatorBatch":
        if not ops:
            raise ValueError("cannot stack an empty operator list")
        kind, p, m = ops[0].kind, ops[0].p, ops[0].m
        for op in ops:
            if op.kind is not kind or op.p != p or op.m != m:
                raise ValueError("batched operators must share kind, p and m")
        if kind is OperatorKind.MASK:
            return cls(kind, p, len(ops), indices=np.stack([op.indices for op in ops]))
        if kind is OperatorKind.DENSE:
            return cls(kind, p, len(ops), matrices=np.stack([op.matrix for op in ops]))
        return cls(kind, p, len(ops))

    @property
    def m(self) -> int:
        if self.kind is OperatorKind.MASK:
            return int(self.indices.shape[1])
        if self.kind is OperatorKind.DENSE:
            return int(self.matrices.shape[1])
        return self.p

    def _check_rows(self, arr: np.ndarray, width: int, what: str) -> None:
        if arr.shape != (self.size, width):
            raise ValueError(f"{what} shape {arr.shape} != expected {(self.size, width)}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        self._check_rows(x, self.p, "input")
        if self.kind is OperatorKind.MASK:
            return np.take_along_axis(x, self.indices, axis=1)
        if self.kind is OperatorKind.DENSE:
            return np.einsum("bmp,bp->bm", self.matrices, x)
        return x.copy()

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        self._check_rows(y, self.m, "adjoint input")
        if self.kind is OperatorKind.MASK:
            out = np.zeros((self.size, self.p))
            np.put_along_axis(out, self.indices, y, axis=1)
            return out
        if self.kind is OperatorKind.DENSE:
            return np.einsum("bmp,bm->bp", self.matrices, y)
        return y.copy()


# --------------------------------------------------------------------------- #
# Sampling
# --------------------------------------------------------------------------- #


def mask_size(p: int, fraction: float) -> int:
    """Number of selected entries, ⌈fraction·p⌉."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"mask fraction must be in (0, 1], got {fraction}")
    m = int(math.ceil(fraction * p - 1e-12))
    if m < 1:
        raise ValueError(f"fraction {fraction} selects no entries of p={p}")
    return m


def sample_mask(p: int, fraction: float, rng: np.random.Generator) -> ForwardOperator:
    """Uniformly random index mask selecting ⌈fraction·p⌉ entries."""
    m = mask_size(p, fraction)
    # Partial Fisher–Yates: only the first m swaps are needed.
    perm = np.arange(p)
    for i in range(m):
        j = int(rng.integers(i, p))
        perm[i], perm[j] = perm[j], perm[i]
    return ForwardOperator.mask(np.sort(perm[:m]), p)


# --------------------------------------------------------------------------- #
# Latent data
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class LatentDatum:
    """d = Px + ε with ε ~ N(0, σ²I)."""

    d: np.ndarray
    operator: ForwardOperator
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", as_vector(self.d, "d"))
        if self.d.shape != (self.operator.m,):
            raise ValueError(f"d has shape {self.d.shape}, operator expects ({self.operator.m},)")


@dataclass(frozen=True, eq=False)
class LatentBatch:
    """Rows of ``d`` are observations under the matching ``operator`` rows."""

    d: np.ndarray
    operator: OperatorBatch
    sigma: float

    @classmethod
    def stack(cls, data: Sequence[LatentDatum]) -> "LatentBatch":
        if not data:
            raise ValueError("cannot stack an empty latent list")
        return cls(
            d=np.stack([dt.d for dt in data]),
            operator=OperatorBatch.stack([dt.operator for dt in data]),
            sigma=data[0].sigma,
        )

    def __len__(self) -> int:
        return self.operator.size


def make_latent(
    x: np.ndarray,
    op: ForwardOperator,
    sigma: float,
    rng: np.random.Generator,
) -> LatentDatum:
    """Draw d = Px + σz with z standard normal from *rng*."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = as_vector(x, "x")
    clean = op.apply(x)
    noise = rng.standard_normal(op.m)
    return LatentDatum(d=clean + sigma * noise, operator=op, sigma=float(sigma))


def make_latent_batch(
    X: np.ndarray,
    fraction: float,
    sigma: float,
    rng: np.random.Generator,
) -> LatentBatch:
    """Vectorized draw of one random mask and noise vector per row of *X* (B, p).

    ``fraction == 1`` yields identity operators.  Unlike the per-datum path
    this consumes a single stream, so it is used where batch order is fixed
    (evaluation), not in training.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    X = np.asarray(X, dtype=np.float64)
    B, p = X.shape
    if fraction >= 1.0:
        ops = OperatorBatch(OperatorKind.IDENTITY, p, B)
    else:
        m = mask_size(p, fraction)
        keys = rng.random((B, p))
        idx = np.sort(np.argsort(keys, axis=1, kind="stable")[:, :m], axis=1)
        ops = OperatorBatch(OperatorKind.MASK, p, B, indices=idx)
    clean = ops.apply(X)
    noise = rng.standard_normal(clean.shape)
    return LatentBatch(d=clean + sigma * noise, operator=ops, sigma=float(sigma))
