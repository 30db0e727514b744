"""Global configuration and defaults for mrmap."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable, Optional

import yaml


@dataclass
class ModelConfig:
    """Shape and hyperparameters of the potential."""

    q: int = 128           # embedding dimension
    ell: int = 5           # network depth
    beta: float = 0.1
    h: float = 1.0
    cg_iters: int = 8
    w_init: float = 1e-2

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.q < 1 or self.ell < 1:
            errors.append(f"model.q and model.ell must be >= 1 (got q={self.q}, ell={self.ell})")
        if self.beta <= 0 or self.h <= 0:
            errors.append("model.beta and model.h must be positive")
        if self.cg_iters < 0:
            errors.append(f"model.cg_iters must be >= 0, got {self.cg_iters}")
        if self.w_init < 0:
            errors.append(f"model.w_init must be >= 0, got {self.w_init}")
        return errors


@dataclass
class TrainConfig:
    """Training loop parameters."""

    epochs: int = 120
    batch_size: int = 64
    lr: float = 1e-3
    lr_decay_factor: float = 0.5
    lr_decay_every: int = 20
    weight_decay: float = 1e-5
    alpha: float = 1.0
    gamma: float = 50.0    # R_c weight
    sigma: float = 0.5
    mask_fraction: float = 0.3
    seed: int = 42

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.epochs < 1 or self.batch_size < 1 or self.lr_decay_every < 1:
            errors.append("train.epochs, train.batch_size and train.lr_decay_every must be >= 1")
        if self.lr < 0 or self.weight_decay < 0:
            errors.append("train.lr and train.weight_decay must be >= 0")
        if self.alpha < 0 or self.gamma < 0:
            errors.append("train.alpha and train.gamma must be >= 0")
        if self.sigma <= 0:
            errors.append(f"train.sigma must be positive, got {self.sigma}")
        if not 0 < self.mask_fraction <= 1:
            errors.append(f"train.mask_fraction must be in (0, 1], got {self.mask_fraction}")
        if not 0 <= self.seed < 2**64:
            errors.append(f"train.seed must be a 64-bit unsigned value, got {self.seed}")
        return errors

    def lr_at(self, epoch: int) -> float:
        """Learning rate for the zero-based *epoch*."""
        return self.lr * self.lr_decay_factor ** (epoch // self.lr_decay_every)


@dataclass
class Gauss1DConfig:
    """1-D closed-form estimator consistency study."""

    theta_true: float = 2.0
    sigma: float = 0.5
    n_grid: list[int] = field(default_factory=lambda: [100, 1000, 10000, 100000])
    seeds: int = 50

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.theta_true <= 0 or self.sigma <= 0:
            errors.append("gauss1d.theta_true and gauss1d.sigma must be positive")
        if not self.n_grid or min(self.n_grid) < 2:
            errors.append("gauss1d.n_grid needs sample sizes >= 2")
        if self.seeds < 1:
            errors.append("gauss1d.seeds must be >= 1")
        return errors


@dataclass
class LangevinConfig:
    """Langevin sampling of a Gaussian precision."""

    theta: list[list[float]] = field(default_factory=lambda: [[1000.0, -1.0], [-1.0, 2.0]])
    delta: float = 0.01
    n_chains: int = 1000
    snapshots: list[int] = field(default_factory=lambda: [1000, 2000, 3000, 4000])
    mle_steps: int = 0
    mle_inner_iters: int = 50
    mle_lr: float = 0.5

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.delta <= 0:
            errors.append(f"langevin.delta must be positive, got {self.delta}")
        if self.n_chains < 2:
            errors.append("langevin.n_chains must be >= 2")
        if any(k < 0 for k in self.snapshots):
            errors.append("langevin.snapshots must be >= 0")
        if self.mle_steps < 0 or self.mle_inner_iters < 1:
            errors.append("langevin.mle_steps must be >= 0 and mle_inner_iters >= 1")
        return errors


@dataclass
class MixtureConfig:
    """Gaussian-mixture recovery experiment."""

    n_train: int = 600
    n_val: int = 1000
    count: int = 6
    radius: float = 8.0
    sigma: float = 1.0
    mask_fraction: float = 1.0
    n_noise: int = 1

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.n_train < 1 or self.n_val < 1 or self.count < 1:
            errors.append("mixture.n_train, mixture.n_val and mixture.count must be >= 1")
        if self.sigma <= 0 or not 0 < self.mask_fraction <= 1:
            errors.append("mixture.sigma must be positive and mask_fraction in (0, 1]")
        return errors


@dataclass
class ImagesConfig:
    """Synthetic image corpus and recovery study."""

    size: int = 8
    n_train: int = 2000
    n_test: int = 500
    sigma: float = 0.05
    mask_fraction: float = 0.3
    fractions: list[float] = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3])
    masks_per_image: int = 10
    n_preview: int = 8
    dataset: Optional[str] = None
    checkpoint: Optional[str] = None

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.size < 4:
            errors.append(f"images.size must be >= 4, got {self.size}")
        if self.n_train < 1 or self.n_test < 1 or self.masks_per_image < 1:
            errors.append("images.n_train, images.n_test and images.masks_per_image must be >= 1")
        if any(not 0 < f <= 1 for f in self.fractions):
            errors.append("images.fractions must lie in (0, 1]")
        if self.sigma <= 0:
            errors.append(f"images.sigma must be positive, got {self.sigma}")
        return errors


_SECTIONS = {
    "model": ModelConfig,
    "train": TrainConfig,
    "gauss1d": Gauss1DConfig,
    "langevin": LangevinConfig,
    "mixture": MixtureConfig,
    "images": ImagesConfig,
}


def _section(cls: type, name: str, data: Any):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    types = {f.name: f.type for f in fields(cls)}
    unknown = sorted(set(data) - set(types))
    if unknown:
        raise ValueError(f"unknown keys in section {name!r}: {', '.join(unknown)}")
    values = dict(data)
    for key, value in values.items():
        # PyYAML reads "1e-3" as a string.
        if types[key] == "float" and isinstance(value, (int, str)) and not isinstance(value, bool):
            try:
                values[key] = float(value)
            except ValueError as exc:
                raise ValueError(f"{name}.{key} must be a number, got {value!r}") from exc
    return cls(**values)


@dataclass
class Config:
    """Top-level configuration."""

    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    gauss1d: Gauss1DConfig = field(default_factory=Gauss1DConfig)
    langevin: LangevinConfig = field(default_factory=LangevinConfig)
    mixture: MixtureConfig = field(default_factory=MixtureConfig)
    images: ImagesConfig = field(default_factory=ImagesConfig)

    @classmethod
    def from_mapping(cls, data: Optional[dict]) -> "Config":
        data = data or {}
        if not isinstance(data, dict):
            raise ValueError("configuration root must be a mapping")
        unknown = sorted(set(data) - set(_SECTIONS))
        if unknown:
            raise ValueError(f"unknown config sections: {', '.join(unknown)}")
        return cls(**{name: _section(sc, name, data.get(name)) for name, sc in _SECTIONS.items()})

    @classmethod
    def from_yaml(cls, path: str | Path) -> "Config":
        """Load configuration from a YAML (or JSON) file."""
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_mapping(data)

    @classmethod
    def default(cls) -> "Config":
        return cls()

    def to_dict(self) -> dict[str, dict[str, Any]]:
        return {
            name: {f.name: getattr(getattr(self, name), f.name) for f in fields(sc)}
            for name, sc in _SECTIONS.items()
        }

    def with_overrides(self, assignments: Iterable[str]) -> "Config":
        """Apply ``section.key=value`` strings; values are parsed as YAML scalars."""
        data = self.to_dict()
        for item in assignments:
            key, sep, raw = item.partition("=")
            section, dot, name = key.strip().partition(".")
            if not sep or not dot:
                raise ValueError(f"override {item!r} is not of the form section.key=value")
            if section not in data:
                raise ValueError(f"unknown config section {section!r}")
            if name not in data[section]:
                raise ValueError(f"unknown key {name!r} in section {section!r}")
            data[section][name] = yaml.safe_load(raw)
        return Config.from_mapping(data)

    def with_seed(self, seed: int) -> "Config":
        return replace(self, train=replace(self.train, seed=int(seed)))

    def validate(self) -> list[str]:
        errors: list[str] = []
        for name in _SECTIONS:
            errors.extend(getattr(self, name).validate())
        return errors
