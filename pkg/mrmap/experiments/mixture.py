"""Gaussian-mixture recovery: train a potential on planar samples, then denoise."""

from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from mrmap.config import Config
from mrmap.data.operators import make_latent_batch
from mrmap.data.rng import RngStream
from mrmap.data.samplers import MixtureSpec, mixture_log_density, nearest_component, sample_mixture
from mrmap.experiments.common import wall_times, write_metrics
from mrmap.io.checkpoint import save_checkpoint
from mrmap.io.plots import Series, panels_svg
from mrmap.io.tables import schema_comment, write_csv
from mrmap.model.flow import consistency_gap, decode, run_flow
from mrmap.model.params import PotentialParams
from mrmap.model.potential import map_objective, potential_value
from mrmap.training.trainer import fit
from mrmap.validate.checks import validate_trajectory

logger = logging.getLogger(__name__)

TRAIN_DATA_STREAM = 10
VAL_DATA_STREAM = 11
TRAIN_EVAL_STREAM = 12
VAL_EVAL_STREAM = 13

POINT_HEADER = [
    "x0", "x1", "d0", "d1", "xhat0", "xhat1",
    "phi_true", "phi_hat", "map_objective", "component", "recovered_component",
]


def recover_points(
    params: PotentialParams,
    spec: MixtureSpec,
    X: np.ndarray,
    sigma: float,
    mask_fraction: float,
    rng: np.random.Generator,
) -> dict[str, Any]:
    """Observe the columns of X once, recover them and evaluate both potentials.

    ``problems`` lists trajectory defects found by :func:`validate_trajectory`.
    """
    batch = make_latent_batch(X.T, mask_fraction, sigma, rng)
    traj = run_flow(params, batch)
    x_hat = decode(params, traj.u_ell)
    return {
        "x": X.T,
        "d": batch.operator.apply_adjoint(batch.d),
        "x_hat": x_hat,
        "phi_true": np.atleast_1d(mixture_log_density(spec, X)),
        "phi_hat": potential_value(params, traj),
        "map_objective": map_objective(params, traj, batch),
        "component": nearest_component(spec, X),
        "recovered_component": nearest_component(spec, x_hat.T),
        "consistency": consistency_gap(traj) ** 2,
        "problems": validate_trajectory(params, traj),
    }


def _point_rows(res: dict[str, Any]) -> list[list[Any]]:
    return [
        [*res["x"][i], *res["d"][i], *res["x_hat"][i],
         res["phi_true"][i], res["phi_hat"][i], res["map_objective"][i],
         int(res["component"][i]), int(res["recovered_component"][i])]
        for i in range(res["x"].shape[0])
    ]


def _panels(path: Path, res: dict[str, Any]) -> None:
    panels_svg(path, [
        ("training data x", [Series(res["x"].T, "x", values=res["phi_true"])]),
        ("observations d", [Series(res["d"].T, "d", color="tab:gray")]),
        ("recovered x̂", [Series(res["x_hat"].T, "x̂", values=res["phi_hat"])]),
    ])


def recovery_summary(res: dict[str, Any], sigma: float) -> dict[str, float]:
    diff = res["x_hat"] - res["x"]
    dim = res["x"].shape[1]
    return {
        "mse": float(np.mean(np.sum(diff * diff, axis=1))),
        "identity_baseline": sigma**2 * dim,
        "component_preserved": float(np.mean(res["component"] == res["recovered_component"])),
        "R_c": float(np.mean(res["consistency"])),
    }


def run_mixture(cfg: Config, out_dir: Path) -> dict[str, Any]:
    mix = cfg.mixture
    problems = mix.validate() + cfg.model.validate() + cfg.train.validate()
    if problems:
        raise ValueError("; ".join(problems))
    out_dir = Path(out_dir)
    seed = cfg.train.seed
    spec = MixtureSpec.ring(mix.count, mix.radius)
    train_cfg = replace(cfg.train, sigma=mix.sigma, mask_fraction=mix.mask_fraction)
    model_cfg = replace(cfg.model, q=max(cfg.model.q, spec.dim))

    X_train = sample_mixture(spec, mix.n_train, RngStream(seed, TRAIN_DATA_STREAM).generator())
    X_val = sample_mixture(spec, mix.n_val, RngStream(seed, VAL_DATA_STREAM).generator())
    result = fit(X_train, train_cfg, model_cfg)
    params = result.params

    outputs = ["checkpoint.json", "metrics.csv"]
    save_checkpoint(out_dir / outputs[0], params, config=cfg.to_dict(),
                    metrics=[m.as_row() for m in result.metrics])
    write_metrics(out_dir / outputs[1], result.metrics)

    summary: dict[str, Any] = {
        "final_epoch": result.metrics[-1].as_row(),
        "wall_time": wall_times(result.metrics),
    }
    warnings: list[str] = []
    for name, X, stream in (("train", X_train, TRAIN_EVAL_STREAM), ("val", X_val, VAL_EVAL_STREAM)):
        res = recover_points(params, spec, X, mix.sigma, mix.mask_fraction,
                             RngStream(seed, stream).generator())
        write_csv(out_dir / f"mixture_{name}.csv", POINT_HEADER, _point_rows(res),
                  comment=schema_comment("mixture-points"))
        _panels(out_dir / f"mixture_{name}.svg", res)
        outputs += [f"mixture_{name}.csv", f"mixture_{name}.svg"]
        summary[name] = recovery_summary(res, mix.sigma)
        warnings += [f"{name}: {p}" for p in res["problems"]]
        logger.info("mixture %s: %s", name, summary[name])

    for w in warnings:
        logger.warning("mixture %s", w)
    summary["warnings"] = warnings
    summary["outputs"] = outputs
    return summary
