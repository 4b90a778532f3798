"""(mu/mu_w, lambda)-CMA-ES with an ask/tell interface, maximising fitness.

Default strategy constants follow Hansen's tutorial; there are no restarts
and no bound handling (genotypes are clamped at decode time).
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class CMAES:
    """Covariance matrix adaptation evolution strategy.

    Parameters
    ----------
    dim : int
        Genotype length.
    popsize : int
        Samples per generation (lambda).
    sigma0 : float
        Initial step size.
    x0 : array-like, optional
        Initial mean. Drawn uniformly from ``init_range`` per coordinate when omitted.
    seed : int
        Seed of the sampling stream.
    """

    def __init__(self, dim, popsize=30, sigma0=1.0, x0=None, init_range=(-1.0, 1.0), seed=0):
        if int(dim) < 1:
            raise ValueError("dimension must be at least 1")
        if int(popsize) < 2:
            raise ValueError("population size must be at least 2")
        if not sigma0 > 0:
            raise ValueError("initial step size must be positive")
        self.dim = n = int(dim)
        self.popsize = lam = int(popsize)
        self.rng = np.random.default_rng(seed)
        if x0 is None:
            self.mean = self.rng.uniform(init_range[0], init_range[1], n)
        else:
            self.mean = np.array(x0, dtype=np.float64).reshape(n)
        self.sigma = float(sigma0)

        self.mu = lam // 2
        w = math.log((lam + 1) / 2) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1,
                       2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.generation = 0
        self.best_x = None
        self.best_f = -math.inf
        self.history = []

    def _decompose(self):
        self.C = 0.5 * (self.C + self.C.T)
        evals, evecs = np.linalg.eigh(self.C)
        floor = 1e-12 * max(float(evals.max()), 1e-300)
        if evals.min() < floor:
            evals = np.maximum(evals, floor)
            self.C = (evecs * evals) @ evecs.T
            self.C = 0.5 * (self.C + self.C.T)
        self.B = evecs
        self.D = np.sqrt(evals)

    def ask(self):
        """``popsize`` samples from N(mean, sigma^2 C), as rows of an array."""
        self._decompose()
        z = self.rng.standard_normal((self.popsize, self.dim))
        y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * y

    def tell(self, genotypes, fitnesses):
        """Update the distribution from evaluated samples (higher is better).

        Ties are ranked by sample index.
        """
        x = np.asarray(genotypes, dtype=np.float64)
        f = np.asarray(fitnesses, dtype=np.float64)
        if x.shape != (self.popsize, self.dim) or f.shape != (self.popsize,):
            raise ValueError(f"expected {self.popsize} genotypes of length {self.dim} "
                             f"and as many fitness values")
        if not np.all(np.isfinite(f)):
            raise ValueError("fitness values must be finite")
        n = self.dim
        order = np.argsort(-f, kind="stable")
        if f[order[0]] > self.best_f:
            self.best_f = float(f[order[0]])
            self.best_x = x[order[0]].copy()

        y = (x[order[:self.mu]] - self.mean) / self.sigma
        y_w = self.weights @ y
        self.mean = self.mean + self.sigma * y_w

        inv_sqrt_c_yw = self.B @ ((self.B.T @ y_w) / self.D)
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * inv_sqrt_c_yw
        ps_norm = float(np.linalg.norm(self.ps))
        hsig = (ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * (self.generation + 1))) / self.chi_n
                < 1.4 + 2 / (n + 1))
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w

        rank_mu = (y.T * self.weights) @ y
        delta_h = (1 - hsig) * self.cc * (2 - self.cc)
        self.C = ((1 - self.c1 - self.cmu + self.c1 * delta_h) * self.C
                  + self.c1 * np.outer(self.pc, self.pc) + self.cmu * rank_mu)
        self.sigma *= math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))
        self.C = 0.5 * (self.C + self.C.T)

        self.generation += 1
        self.history.append({"generation": self.generation, "mean": float(f.mean()),
                             "max": float(f.max()), "best_so_far": self.best_f})
        return self

    def optimize(self, fn, generations):
        """Maximise ``fn`` for a fixed number of generations; returns ``(best_x, best_f)``."""
        for _ in range(generations):
            xs = self.ask()
            self.tell(xs, [fn(v) for v in xs])
        return self.best_x, self.best_f

    def state_dict(self):
        return {
            "dim": self.dim, "popsize": self.popsize, "mean": self.mean.tolist(),
            "sigma": self.sigma, "C": self.C.ravel().tolist(), "pc": self.pc.tolist(),
            "ps": self.ps.tolist(), "generation": self.generation,
            "best_x": None if self.best_x is None else self.best_x.tolist(),
            "best_f": self.best_f, "history": self.history,
            "rng": self.rng.bit_generator.state,
        }

    @classmethod
    def from_state_dict(cls, state):
        es = cls(state["dim"], state["popsize"], sigma0=state["sigma"], x0=state["mean"])
        es.C = np.asarray(state["C"], dtype=np.float64).reshape(es.dim, es.dim)
        es.pc = np.asarray(state["pc"], dtype=np.float64)
        es.ps = np.asarray(state["ps"], dtype=np.float64)
        es.generation = int(state["generation"])
        es.best_x = None if state["best_x"] is None else np.asarray(state["best_x"])
        es.best_f = float(state["best_f"])
        es.history = list(state["history"])
        es.rng.bit_generator.state = state["rng"]
        return es

    def save(self, path):
        Path(path).write_text(json.dumps(self.state_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_state_dict(json.loads(Path(path).read_text()))
