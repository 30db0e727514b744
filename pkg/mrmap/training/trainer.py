"""Training loop: fresh projections and noise per sample, Adam, step schedule."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mrmap.config import ModelConfig, TrainConfig
from mrmap.data.operators import ForwardOperator, LatentBatch, make_latent, sample_mask
from mrmap.data.rng import RngStream, datum_stream
from mrmap.linalg.arrays import as_matrix
from mrmap.model.grad import loss_terms_and_grad
from mrmap.model.params import PotentialParams
from mrmap.training.optim import AdamState, adam_step
from mrmap.validate.checks import validate_params

logger = logging.getLogger(__name__)

# Stream ids under the run seed; datum streams use ids in [2³², 2⁶³).
INIT_STREAM = 1
SHUFFLE_STREAM = 1 << 63


@dataclass(frozen=True)
class EpochMetrics:
    """Sample-weighted epoch means of the loss terms (epochs count from 1)."""

    epoch: int
    R_e: float
    R_p: float
    R_c: float
    total: float
    lr: float
    wall_time: float

    def as_row(self) -> dict[str, float]:
        return {
            "epoch": self.epoch,
            "R_e": self.R_e,
            "R_p": self.R_p,
            "R_c": self.R_c,
            "total": self.total,
            "lr": self.lr,
        }


@dataclass
class FitResult:
    params: PotentialParams
    metrics: list[EpochMetrics] = field(default_factory=list)
    optimizer: Optional[AdamState] = None


def initial_params(p: int, model_cfg: ModelConfig, train_cfg: TrainConfig) -> PotentialParams:
    """Seeded initialization for data of dimension *p*."""
    rng = RngStream(train_cfg.seed, INIT_STREAM).generator()
    return PotentialParams.initialize(
        p, model_cfg.q, model_cfg.ell, rng,
        w_init=model_cfg.w_init,
        beta=model_cfg.beta,
        h=model_cfg.h,
        sigma=train_cfg.sigma,
        cg_iters=model_cfg.cg_iters,
    )


def draw_training_batch(
    X: np.ndarray, indices: np.ndarray, epoch: int, cfg: TrainConfig
) -> LatentBatch:
    """Latent batch for rows *indices* of X (n × p); each datum has its own stream."""
    p = X.shape[1]
    data = []
    for i in indices:
        rng = datum_stream(cfg.seed, epoch, int(i)).generator()
        if cfg.mask_fraction >= 1.0:
            op = ForwardOperator.identity(p)
        else:
            op = sample_mask(p, cfg.mask_fraction, rng)
        data.append(make_latent(X[i], op, cfg.sigma, rng))
    return LatentBatch.stack(data)


def fit(
    data,
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    params: Optional[PotentialParams] = None,
) -> FitResult:
    """Train on the columns of *data* (p × n).

    Runs ``epochs × ⌈n/batch_size⌉`` Adam steps.  Fully deterministic given
    ``train_cfg.seed``.

    Raises
    ------
    ValueError
        On empty data or an invalid configuration.
    RuntimeError
        If a batch loss is not finite.
    """
    problems = train_cfg.validate() + model_cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    X = as_matrix(data, "training data").T
    n, p = X.shape
    if n == 0:
        raise ValueError("training data is empty")
    if train_cfg.batch_size > n:
        raise ValueError(f"batch_size {train_cfg.batch_size} exceeds the {n} training samples")

    if params is None:
        params = initial_params(p, model_cfg, train_cfg)
    elif params.p != p:
        raise ValueError(f"model expects p={params.p}, data has p={p}")
    state = AdamState.for_params(params)
    metrics: list[EpochMetrics] = []
    logger.info(
        "Training: n=%d p=%d q=%d ell=%d params=%d epochs=%d batch=%d gamma=%g",
        n, p, params.q, params.ell, params.n_learnable(), train_cfg.epochs,
        train_cfg.batch_size, train_cfg.gamma,
    )

    for epoch in range(train_cfg.epochs):
        start = time.perf_counter()
        lr = train_cfg.lr_at(epoch)
        order = RngStream(train_cfg.seed, SHUFFLE_STREAM | epoch).generator().permutation(n)
        sums = np.zeros(3)
        for step, lo in enumerate(range(0, n, train_cfg.batch_size)):
            idx = order[lo:lo + train_cfg.batch_size]
            batch = draw_training_batch(X, idx, epoch, train_cfg)
            terms, grads = loss_terms_and_grad(
                params, batch, X[idx], train_cfg.alpha, train_cfg.gamma
            )
            if not (terms.is_finite() and grads.is_finite()):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch + 1}, step {step + 1}: "
                    f"R_e={terms.R_e}, R_p={terms.R_p}, R_c={terms.R_c}"
                )
            params = adam_step(params, state, grads, lr, train_cfg.weight_decay)
            sums += len(idx) * np.array([terms.R_e, terms.R_p, terms.R_c])
            logger.debug(
                "epoch %d step %d: loss=%.6g", epoch + 1, step + 1,
                terms.total(train_cfg.alpha, train_cfg.gamma),
            )
        R_e, R_p, R_c = (float(v) for v in sums / n)
        total = R_e + train_cfg.alpha * R_p + train_cfg.gamma * R_c
        record = EpochMetrics(epoch + 1, R_e, R_p, R_c, total, lr, time.perf_counter() - start)
        metrics.append(record)
        logger.info(
            "epoch %d/%d: total=%.6g R_e=%.6g R_p=%.6g R_c=%.3e lr=%.3g (%.2fs)",
            record.epoch, train_cfg.epochs, total, R_e, R_p, R_c, lr, record.wall_time,
        )

    problems = validate_params(params)
    if problems:
        raise RuntimeError("trained parameters are invalid: " + "; ".join(problems))
    return FitResult(params=params, metrics=metrics, optimizer=state)
