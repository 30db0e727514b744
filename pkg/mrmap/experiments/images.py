"""Synthetic image corpus: generation, training and masked recovery."""

from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from mrmap.config import Config, ImagesConfig
from mrmap.data.images import generate_images
from mrmap.data.operators import make_latent_batch
from mrmap.data.rng import RngStream
from mrmap.experiments.common import wall_times, write_metrics
from mrmap.io.checkpoint import load_checkpoint, save_checkpoint
from mrmap.io.pgm import tile_images, write_pgm
from mrmap.io.tables import load_dataset, save_dataset, schema_comment, write_csv
from mrmap.model.flow import data_fit, recover
from mrmap.training.trainer import fit
from mrmap.validate.checks import validate_dataset
from mrmap.validate.reports import relative_error_stats

logger = logging.getLogger(__name__)

TRAIN_IMAGES_STREAM = 20
TEST_IMAGES_STREAM = 21
# Recovery draws live above the training stream range.
RECOVER_STREAM = 1 << 62

RECOVER_HEADER = ["fraction", "mean", "std", "fit_mean", "fit_std", "count"]


# --------------------------------------------------------------------------- #
# Corpus
# --------------------------------------------------------------------------- #


def make_images(cfg: ImagesConfig, seed: int, out_dir: Path) -> dict[str, Any]:
    """Write ``images_train.csv`` / ``images_test.csv`` (+ sidecars) and PGM previews."""
    problems = cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    out_dir = Path(out_dir)
    outputs = []
    for name, n, stream in (("train", cfg.n_train, TRAIN_IMAGES_STREAM), ("test", cfg.n_test, TEST_IMAGES_STREAM)):
        X = generate_images(n, RngStream(seed, stream).generator(), size=cfg.size)
        path = out_dir / f"images_{name}.csv"
        save_dataset(path, X, {"size": cfg.size, "split": name, "seed": seed})
        outputs += [path.name, path.with_suffix(".json").name]
        if name == "test":
            for i in range(min(cfg.n_preview, n)):
                preview = f"image_{i:03d}.pgm"
                write_pgm(out_dir / preview, X[i].reshape(cfg.size, cfg.size))
                outputs.append(preview)
    logger.info("make-images: %d train / %d test images (%d×%d) → %s",
                cfg.n_train, cfg.n_test, cfg.size, cfg.size, out_dir)
    return {"outputs": outputs}


def _load_images(path: Optional[str], cfg: ImagesConfig, seed: int, split: str) -> np.ndarray:
    if path:
        X, meta = load_dataset(Path(path))
        size = int(meta.get("size", round(np.sqrt(X.shape[1]))))
        if size * size != X.shape[1]:
            raise ValueError(f"dataset {path} rows are not square images")
        return X
    n, stream = (cfg.n_train, TRAIN_IMAGES_STREAM) if split == "train" else (cfg.n_test, TEST_IMAGES_STREAM)
    return generate_images(n, RngStream(seed, stream).generator(), size=cfg.size)


# --------------------------------------------------------------------------- #
# Training
# --------------------------------------------------------------------------- #


def train_images(cfg: Config, out_dir: Path) -> dict[str, Any]:
    """Train on the corpus (generated unless ``images.dataset`` is set)."""
    img = cfg.images
    problems = img.validate() + cfg.model.validate() + cfg.train.validate()
    if problems:
        raise ValueError("; ".join(problems))
    out_dir = Path(out_dir)
    X = _load_images(img.dataset, img, cfg.train.seed, "train")
    bad = validate_dataset(X)
    if bad:
        raise ValueError("; ".join(bad))
    train_cfg = replace(cfg.train, sigma=img.sigma, mask_fraction=img.mask_fraction)
    result = fit(X.T, train_cfg, cfg.model)
    save_checkpoint(out_dir / "checkpoint.json", result.params, config=cfg.to_dict(),
                    metrics=[m.as_row() for m in result.metrics])
    write_metrics(out_dir / "metrics.csv", result.metrics)
    return {
        "final_epoch": result.metrics[-1].as_row(),
        "wall_time": wall_times(result.metrics),
        "outputs": ["checkpoint.json", "metrics.csv"],
    }


# --------------------------------------------------------------------------- #
# Recovery
# --------------------------------------------------------------------------- #


def relative_errors(x_hat: np.ndarray, X: np.ndarray) -> np.ndarray:
    """‖x̂ − x‖²/‖x‖² per row."""
    diff = x_hat - X
    return np.sum(diff * diff, axis=1) / np.sum(X * X, axis=1)


def run_recover(cfg: Config, checkpoint: Path, out_dir: Path) -> dict[str, Any]:
    """Relative recovery error per observed-pixel fraction, with PGM previews."""
    img = cfg.images
    problems = img.validate()
    if problems:
        raise ValueError("; ".join(problems))
    out_dir = Path(out_dir)
    params = load_checkpoint(checkpoint).params
    X = _load_images(img.dataset, img, cfg.train.seed, "test")
    bad = validate_dataset(X, p=params.p)
    if bad:
        raise ValueError("checkpoint/dataset mismatch: " + "; ".join(bad))
    size = int(round(np.sqrt(X.shape[1])))

    nonzero = np.sum(X * X, axis=1) > 0
    warnings = []
    if not nonzero.all():
        msg = f"skipping {int((~nonzero).sum())} all-zero images (relative error undefined)"
        logger.warning(msg)
        warnings.append(msg)
    X = X[nonzero]
    if X.shape[0] == 0:
        raise ValueError("no image with nonzero norm to recover")

    rows, per_fraction, outputs = [], {}, []
    for fi, fraction in enumerate(img.fractions):
        errs, fit_errs = [], []
        for k in range(img.masks_per_image):
            rng = RngStream(cfg.train.seed, RECOVER_STREAM | (fi << 32) | k).generator()
            batch = make_latent_batch(X, fraction, img.sigma, rng)
            x_hat = recover(params, batch)
            x_fit = data_fit(params, batch)
            errs.append(relative_errors(x_hat, X))
            fit_errs.append(relative_errors(x_fit, X))
            if k == 0:
                observed = batch.operator.apply_adjoint(batch.d)
                for i in range(min(img.n_preview, X.shape[0])):
                    name = f"recover_{int(round(100 * fraction)):02d}pct_{i:03d}.pgm"
                    tiles = [a[i].reshape(size, size) for a in (X, observed, x_hat, x_fit)]
                    write_pgm(out_dir / name, tile_images(tiles))
                    outputs.append(name)
        stats = relative_error_stats(np.concatenate(errs))
        fit_stats = relative_error_stats(np.concatenate(fit_errs))
        rows.append([fraction, stats["mean"], stats["std"], fit_stats["mean"], fit_stats["std"], stats["count"]])
        per_fraction[str(fraction)] = {"recovered": stats, "data_fit": fit_stats}
        logger.info("recover: fraction %.2f → relative error %.4g ± %.3g", fraction, stats["mean"], stats["std"])

    write_csv(out_dir / "recover.csv", RECOVER_HEADER, rows, comment=schema_comment("recover"))
    outputs.insert(0, "recover.csv")
    return {"per_fraction": per_fraction, "outputs": outputs, "warnings": warnings}
