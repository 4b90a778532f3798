"""scikit-learn style wrapper around the evolutionary pipeline."""
from __future__ import annotations

import tempfile

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .controllers import make_variant
from .experiments.config import ExperimentConfig
from .experiments.evaluation import condition_arch
from .experiments.protocols import evolve, retest
from .validation import check_genotype, check_sensor_inputs


class SwarmEvolver(BaseEstimator):
    """Evolve a swarm controller with CMA-ES.

    ``fit`` runs the full evolutionary loop (X and y are ignored, the
    environment is the data). After fitting, ``best_genotype_`` holds the
    best individual and ``learning_curve_`` an array with columns
    (generation, mean, max, best_so_far). ``score`` retests the genotype
    with fresh seeds; ``predict`` deploys one robot's controller over a
    sequence of rescaled sensor vectors.

    Examples
    --------
    >>> est = SwarmEvolver(condition="baseline", swarm_size=5, trial_seconds=5,
    ...                    popsize=4, generations=1)
    >>> est.fit().best_genotype_.shape
    (180,)
    """

    def __init__(self, condition="hebbian", swarm_size=20, arena="circular",
                 trial_seconds=600.0, repeats=3, popsize=30, generations=100, sigma0=1.0,
                 init_range=(-1.0, 1.0), layer_sizes=None, random_state=0, n_jobs=1,
                 out_dir=None):
        self.condition = condition
        self.swarm_size = swarm_size
        self.arena = arena
        self.trial_seconds = trial_seconds
        self.repeats = repeats
        self.popsize = popsize
        self.generations = generations
        self.sigma0 = sigma0
        self.init_range = init_range
        self.layer_sizes = layer_sizes
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.out_dir = out_dir

    def _config(self):
        return ExperimentConfig(
            condition=self.condition, swarm_size=int(self.swarm_size), arena=self.arena,
            trial_seconds=float(self.trial_seconds), repeats=int(self.repeats),
            popsize=int(self.popsize), generations=int(self.generations),
            sigma0=float(self.sigma0), init_range=list(self.init_range),
            layer_sizes=None if self.layer_sizes is None else list(self.layer_sizes),
            seed=int(self.random_state or 0), parallel=int(self.n_jobs))

    def fit(self, X=None, y=None):
        config = self._config()
        if self.out_dir is None:
            with tempfile.TemporaryDirectory() as tmp:
                report = evolve(config, tmp, resume=False)
        else:
            report = evolve(config, self.out_dir)
        self.config_ = config
        self.report_ = report
        self.best_genotype_ = np.asarray(report.best_genotype)
        self.best_fitness_ = report.best_fitness
        self.learning_curve_ = np.array([[r["generation"], r["mean"], r["max"],
                                          r["best_so_far"]] for r in report.generations])
        return self

    def score(self, X=None, y=None, repetitions=10):
        """Mean trial fitness over fresh-seed retests."""
        check_is_fitted(self, "best_genotype_")
        summary, _ = retest(self.best_genotype_, self.config_, repetitions=repetitions)
        return summary.mean

    def make_controller(self, n_robots, rng=None):
        check_is_fitted(self, "best_genotype_")
        rng = np.random.default_rng(self.random_state) if rng is None else rng
        arch = condition_arch(self.config_)
        g = check_genotype(self.best_genotype_, self.condition, arch)
        return make_variant(self.condition, g, n_robots, rng, arch=arch)

    def predict(self, X):
        """Wheel commands for consecutive sensor vectors fed to a single robot."""
        controller = self.make_controller(1)
        X = check_sensor_inputs(X, controller.n_sensor_inputs)
        return np.array([controller.act(0, x) for x in X])
