"""Fitness evaluation of genotypes, serially or on a process pool."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..controllers import DEFAULT_ARCH, RECURRENT_ARCH
from ..metrics import fitness_individual, fitness_trial
from ..plastic_net import Architecture
from ..swarm_sim import NoiseModel, make_field
from ..trial import run_trial


def condition_arch(config):
    if config.layer_sizes:
        return Architecture(tuple(config.layer_sizes))
    return RECURRENT_ARCH if config.condition == "recurrent" else DEFAULT_ARCH


def trial_settings(config, swarm_size=None, arena=None, seconds=None):
    """Keyword arguments for ``run_trial`` derived from a config."""
    n = swarm_size or config.swarm_size
    if config.condition == "hebbian_single" and swarm_size is None:
        n = 1
    return {
        "n_robots": n,
        "seconds": float(seconds or config.trial_seconds),
        "field": make_field(arena or config.arena),
        "noise": NoiseModel(**config.noise),
        "arch": condition_arch(config),
        "r_spawn": float(config.r_spawn),
        "collisions": bool(config.collisions),
        "switch_every": int(config.switch_every),
    }


def evaluate_individual(job):
    """Median trial fitness of one genotype; ``job`` is picklable for pools."""
    kind, genotype, seed, key, settings, repeats = job
    fits = [fitness_trial(run_trial(kind, genotype, seed, key=tuple(key) + (rep,), **settings))
            for rep in range(repeats)]
    if repeats == 3:
        return fitness_individual(*fits), fits
    return float(np.median(fits)), fits


def evaluate_population(config, genotypes, generation, pool=None):
    settings = trial_settings(config)
    jobs = [(config.condition, np.asarray(g), config.seed, ("trial", generation, i), settings,
             config.repeats) for i, g in enumerate(genotypes)]
    results = list(pool.map(evaluate_individual, jobs)) if pool else [
        evaluate_individual(j) for j in jobs]
    return np.array([r[0] for r in results]), [r[1] for r in results]


def make_pool(parallel):
    return ProcessPoolExecutor(max_workers=parallel) if parallel > 1 else None
