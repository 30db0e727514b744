"""Command-line interface for mrmap.

Usage
-----
    mrmap gauss1d --out runs/gauss1d --seed 7
    mrmap langevin --out runs/langevin --set langevin.delta=0.044
    mrmap mixture --config mixture.yaml --out runs/mixture
    mrmap make-images --out runs/images
    mrmap train-images --out runs/images --set images.dataset=runs/images/images_train.csv
    mrmap recover --checkpoint runs/images/checkpoint.json --out runs/recover

Exit codes: 0 on success, 2 on usage/configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click

from mrmap.config import Config
from mrmap.validate.reports import build_run_report, save_report

logging.basicConfig(
    level=logging.INFO,
    format="%(levelname)s %(name)s: %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger("mrmap.cli")


def _load_config(config_path: Optional[str], overrides: tuple[str, ...], seed: Optional[int]) -> Config:
    try:
        cfg = Config.from_yaml(config_path) if config_path else Config.default()
        cfg = cfg.with_overrides(overrides)
        if seed is not None:
            cfg = cfg.with_seed(seed)
    except (OSError, ValueError, TypeError) as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from exc
    problems = cfg.validate()
    if problems:
        raise click.UsageError("invalid configuration: " + "; ".join(problems))
    return cfg


def common_options(func: Callable) -> Callable:
    """--config / --set / --out / --seed / --verbose, shared by every command."""

    @click.option("--config", "-c", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
                  help="YAML or JSON configuration file")
    @click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
                  help="Override one configuration value (repeatable)")
    @click.option("--out", "-o", "out_dir", default="out", show_default=True, help="Output directory")
    @click.option("--seed", default=None, type=click.IntRange(0, 2**64 - 1), help="Root random seed")
    @click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
    @functools.wraps(func)
    def wrapper(config_path, overrides, out_dir, seed, verbose, **kwargs):
        if verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        cfg = _load_config(config_path, overrides, seed)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return func(cfg=cfg, out=out, **kwargs)

    return wrapper


def _finish(command: str, out: Path, run: Callable[[], dict[str, Any]]) -> None:
    """Run an experiment, turn failures into exit code 1, write ``report.json``."""
    try:
        summary = run()
    except (ValueError, RuntimeError, OSError) as exc:
        logger.error("%s failed: %s", command, exc)
        raise SystemExit(1)
    outputs = summary.pop("outputs", [])
    warnings = summary.pop("warnings", [])
    report = build_run_report(command, outputs, summary=summary, warnings=warnings)
    save_report(report, out / "report.json")
    logger.info("%s done; %d outputs in %s", command, len(outputs), out)


@click.group()
@click.version_option(package_name="mrmap")
def main() -> None:
    """Maximum-recovery MAP estimation of Gibbs potentials."""


@main.command("gauss1d")
@common_options
def gauss1d_cmd(cfg: Config, out: Path) -> None:
    """Consistency of the closed-form 1-D estimators."""
    from mrmap.experiments.gauss1d import run_gauss1d

    _finish("gauss1d", out, lambda: run_gauss1d(cfg.gauss1d, cfg.train.seed, out))


@main.command("langevin")
@common_options
@click.option("--mle-steps", default=None, type=click.IntRange(0), help="Also fit Θ by Langevin MLE")
def langevin_cmd(cfg: Config, out: Path, mle_steps: Optional[int]) -> None:
    """Langevin sampling of an ill-conditioned Gaussian."""
    from dataclasses import replace

    from mrmap.experiments.langevin import run_langevin

    lcfg = cfg.langevin if mle_steps is None else replace(cfg.langevin, mle_steps=mle_steps)
    _finish("langevin", out, lambda: run_langevin(lcfg, cfg.train.seed, out))


@main.command("mixture")
@common_options
def mixture_cmd(cfg: Config, out: Path) -> None:
    """Train on a planar Gaussian mixture and recover noisy observations."""
    from mrmap.experiments.mixture import run_mixture

    _finish("mixture", out, lambda: run_mixture(cfg, out))


@main.command("make-images")
@common_options
def make_images_cmd(cfg: Config, out: Path) -> None:
    """Write the synthetic image corpus."""
    from mrmap.experiments.images import make_images

    _finish("make-images", out, lambda: make_images(cfg.images, cfg.train.seed, out))


@main.command("train-images")
@common_options
def train_images_cmd(cfg: Config, out: Path) -> None:
    """Train a potential on the image corpus."""
    from mrmap.experiments.images import train_images

    _finish("train-images", out, lambda: train_images(cfg, out))


@main.command("recover")
@common_options
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path(dir_okay=False),
              help="Trained checkpoint (defaults to images.checkpoint)")
def recover_cmd(cfg: Config, out: Path, checkpoint_path: Optional[str]) -> None:
    """Relative recovery error across observed-pixel fractions."""
    from mrmap.experiments.images import run_recover

    checkpoint = checkpoint_path or cfg.images.checkpoint
    if not checkpoint:
        raise click.UsageError("recover needs --checkpoint or images.checkpoint")
    _finish("recover", out, lambda: run_recover(cfg, Path(checkpoint), out))


if __name__ == "__main__":
    main()
