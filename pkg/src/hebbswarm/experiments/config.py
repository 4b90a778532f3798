"""Experiment configuration: YAML file, named profiles, CLI overrides.

Schema (all keys optional; unspecified keys take the profile value)::

    condition: hebbian        # hebbian | baseline | baseline_a | hebbian_single | recurrent
    swarm_size: 20
    arena: circular           # circular | linear | bimodal | rosenbrock
    trial_seconds: 600
    repeats: 3                # trials per individual, fitness is their median
    popsize: 30
    generations: 100
    runs: 10
    seed: 0
    sigma0: 1.0
    init_range: [-1.0, 1.0]   # genotype initial sampling range
    layer_sizes: null         # null -> default network of the condition
    r_spawn: 12.0
    collisions: true
    switch_every: 1           # Baseline-A resampling cadence in control steps
    parallel: 1
    out: runs
    noise: {std_light: 0.05, std_theta: 0.043, std_dist: 0.0046, p_dropout: 0.2}
    retest: {repetitions: 60, save_trajectories: 1, swarm_sizes: [10, 20, 50, 100],
             arenas: [linear, bimodal, rosenbrock, circular]}
    perturb: {seconds: 600, switch_time: 300, shifted_centre: [3.0, 3.0],
              histogram_interval: 150, histogram_bins: 50}
    arch_grid: {depths: [1, 2, 3], widths: [3, 9, 36], skip: [[3, 36]],
                generations: 20, popsize: 8}
"""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..controllers import KINDS

ARENAS = ("circular", "linear", "bimodal", "rosenbrock")


class ConfigError(ValueError):
    pass


def _noise():
    return {"std_light": 0.05, "std_theta": 0.043, "std_dist": 0.0046, "p_dropout": 0.2}


def _retest():
    return {"repetitions": 60, "save_trajectories": 1, "swarm_sizes": [10, 20, 50, 100],
            "arenas": ["linear", "bimodal", "rosenbrock", "circular"]}


def _perturb():
    return {"seconds": 600.0, "switch_time": 300.0, "shifted_centre": [3.0, 3.0],
            "histogram_interval": 150.0, "histogram_bins": 50}


def _arch_grid():
    return {"depths": [1, 2, 3], "widths": [3, 9, 36], "skip": [[3, 36]],
            "generations": 20, "popsize": 8}


@dataclass
class ExperimentConfig:
    condition: str = "hebbian"
    swarm_size: int = 20
    arena: str = "circular"
    trial_seconds: float = 600.0
    repeats: int = 3
    popsize: int = 30
    generations: int = 100
    runs: int = 10
    seed: int = 0
    sigma0: float = 1.0
    init_range: list = field(default_factory=lambda: [-1.0, 1.0])
    layer_sizes: list | None = None
    r_spawn: float = 12.0
    collisions: bool = True
    switch_every: int = 1
    parallel: int = 1
    out: str = "runs"
    noise: dict = field(default_factory=_noise)
    retest: dict = field(default_factory=_retest)
    perturb: dict = field(default_factory=_perturb)
    arch_grid: dict = field(default_factory=_arch_grid)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.condition not in KINDS:
            raise ConfigError(f"condition must be one of {KINDS}, got {self.condition!r}")
        if self.arena not in ARENAS:
            raise ConfigError(f"arena must be one of {ARENAS}, got {self.arena!r}")
        for name in ("swarm_size", "repeats", "popsize", "generations", "runs", "parallel",
                     "switch_every"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.popsize < 2:
            raise ConfigError("popsize must be at least 2")
        for name in ("trial_seconds", "sigma0", "r_spawn"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be positive")
        if len(self.init_range) != 2 or not self.init_range[0] < self.init_range[1]:
            raise ConfigError("init_range must be [low, high] with low < high")
        if self.layer_sizes is not None and (
                len(self.layer_sizes) < 2 or any(int(s) < 1 for s in self.layer_sizes)):
            raise ConfigError("layer_sizes must list at least two positive sizes")
        for name, defaults in (("noise", _noise()), ("retest", _retest()),
                               ("perturb", _perturb()), ("arch_grid", _arch_grid())):
            section = getattr(self, name)
            if not isinstance(section, dict):
                raise ConfigError(f"{name} must be a mapping")
            unknown = set(section) - set(defaults)
            if unknown:
                raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
            setattr(self, name, {**defaults, **section})

    def to_dict(self):
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, data, base=None):
        base = base.to_dict() if base is not None else cls().to_dict()
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(base)
        for key, value in data.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def save(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))

    @classmethod
    def load(cls, path, profile=None):
        try:
            data = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a mapping")
        return cls.from_dict(data, base=profile_config(profile) if profile else None)


PROFILES = {
    "full": {},
    "small": {"popsize": 8, "generations": 20, "swarm_size": 10, "trial_seconds": 120.0,
              "runs": 5, "retest": {"repetitions": 10}},
}


def profile_config(name="full", **overrides):
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    cfg = ExperimentConfig.from_dict(PROFILES[name])
    return ExperimentConfig.from_dict(overrides, base=cfg) if overrides else cfg
