"""Langevin sampling of an ill-conditioned Gaussian and its slow mixing."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from mrmap.config import LangevinConfig
from mrmap.data.rng import RngStream
from mrmap.data.samplers import (
    ar1_stationary_cov,
    ar1_variance_fraction,
    langevin_run,
    sample_gaussian_precision,
)
from mrmap.estimators.langevin_mle import closed_form_precision_mle, fit_precision_mle
from mrmap.io.plots import Series, scatter_svg
from mrmap.io.tables import schema_comment, write_csv
from mrmap.linalg.arrays import as_matrix

logger = logging.getLogger(__name__)

REFERENCE_STREAM = 1
CHAIN_STREAM = 2
MLE_STREAM = 3

VARIANCE_HEADER = ["iteration", "slow_var", "target_slow_var", "ratio", "predicted_ratio"]
SAMPLES_HEADER = ["source", "iteration", "x0", "x1"]


def slow_direction(Theta: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit eigenvector of the smallest eigenvalue of Θ (largest variance) and that eigenvalue."""
    lam, vec = np.linalg.eigh(Theta)
    return vec[:, 0], float(lam[0])


def slow_variance(X: np.ndarray, v: np.ndarray) -> float:
    """Second moment of the chains along *v* (the target mean is 0)."""
    proj = v @ X
    return float(np.mean(proj * proj))


def run_langevin(cfg: LangevinConfig, root_seed: int, out_dir: Path) -> dict[str, Any]:
    problems = cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    out_dir = Path(out_dir)
    Theta = as_matrix(cfg.theta, "langevin.theta")
    p = Theta.shape[0]
    v, lam_min = slow_direction(Theta)
    target = 1.0 / lam_min
    snapshots = sorted(set(int(k) for k in cfg.snapshots))
    n_iters = max(snapshots, default=0)

    reference = sample_gaussian_precision(
        Theta, cfg.n_chains, RngStream(root_seed, REFERENCE_STREAM).generator()
    )
    run = langevin_run(
        Theta, cfg.delta, cfg.n_chains, n_iters,
        RngStream(root_seed, CHAIN_STREAM).generator(), record_at=snapshots,
    )
    predicted = {k: float(ar1_variance_fraction(Theta, cfg.delta, k)[0]) for k in snapshots}

    var_rows = []
    for k in snapshots:
        sv = slow_variance(run.snapshots[k], v)
        var_rows.append([k, sv, target, sv / target, predicted[k]])
    outputs = ["langevin_variance.csv"]
    write_csv(out_dir / outputs[0], VARIANCE_HEADER, var_rows, comment=schema_comment("langevin-variance"))

    if p == 2:
        sample_rows = [["target", 0, a, b] for a, b in reference.T]
        for k in snapshots:
            sample_rows.extend(["langevin", k, a, b] for a, b in run.snapshots[k].T)
        write_csv(out_dir / "langevin_samples.csv", SAMPLES_HEADER, sample_rows,
                  comment=schema_comment("langevin-samples"))
        outputs.append("langevin_samples.csv")
        for k in snapshots:
            name = f"langevin_{k}.svg"
            scatter_svg(
                out_dir / name,
                [Series(reference, "target", color="tab:red"),
                 Series(run.snapshots[k], "Langevin", color="tab:blue")],
                title=f"{k} iterations",
            )
            outputs.append(name)
    else:
        logger.info("Skipping scatter output for p=%d", p)

    stationary = ar1_stationary_cov(Theta, cfg.delta)
    summary: dict[str, Any] = {
        "delta": cfg.delta,
        "n_chains": cfg.n_chains,
        "target_slow_var": target,
        "stationary_slow_var": float(v @ stationary @ v),
        "ratios": {str(r[0]): r[3] for r in var_rows},
        "grad_evals_per_chain": run.grad_evals,
    }

    if cfg.mle_steps > 0:
        fit = fit_precision_mle(
            reference, cfg.delta, RngStream(root_seed, MLE_STREAM).generator(),
            n_steps=cfg.mle_steps, inner_iters=cfg.mle_inner_iters,
            n_chains=cfg.n_chains, lr=cfg.mle_lr,
        )
        mle_rows = [[step] + list(T.ravel()) for step, T in enumerate(fit.history)]
        header = ["step"] + [f"theta_{i}{j}" for i in range(p) for j in range(p)]
        write_csv(out_dir / "langevin_mle.csv", header, mle_rows, comment=schema_comment("langevin-mle"))
        outputs.append("langevin_mle.csv")
        summary["mle"] = {
            "final": fit.Theta.tolist(),
            "closed_form": closed_form_precision_mle(reference).tolist(),
            "grad_evals": fit.grad_evals,
        }

    logger.info("langevin: slow-direction ratios %s", summary["ratios"])
    summary["outputs"] = outputs
    return summary
