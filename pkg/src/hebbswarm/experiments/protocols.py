"""Experiment protocols: evolve, retest, scale, flex, perturb, arch-grid."""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import metrics
from ..cmaes import CMAES
from ..controllers import genotype_length
from ..plastic_net import Architecture
from ..seeding import seed_sequence
from ..swarm_sim import make_field, write_trajectory_csv
from ..trial import run_trial
from .config import ExperimentConfig
from .evaluation import condition_arch, evaluate_population, make_pool, trial_settings

log = logging.getLogger(__name__)

CURVE_HEADER = ["generation", "mean", "max", "best_so_far"]


@dataclass
class RunReport:
    condition: str
    seed: int
    genotype_dim: int
    generations: list = field(default_factory=list)
    best_genotype: list = field(default_factory=list)
    best_fitness: float = float("-inf")
    wall_clock: float = 0.0

    def to_json(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=1))

    @classmethod
    def from_json(cls, path):
        return cls(**json.loads(Path(path).read_text()))

    def curve(self, column):
        return np.array([row[column] for row in self.generations])


def write_learning_curve(path, history):
    metrics.write_series_csv(path, CURVE_HEADER, *[[row[c] for row in history]
                                                   for c in CURVE_HEADER])


def _cmaes_seed(config):
    return int(seed_sequence(config.seed, "cmaes").generate_state(1)[0])


def evolve(config, out_dir=None, resume=True, stop_after=None):
    """Evolve a genotype for ``config.condition`` with CMA-ES.

    Every generation the optimizer state is checkpointed to
    ``checkpoint.json`` and ``learning_curve.csv`` is rewritten; an existing
    checkpoint for the same config is resumed. ``stop_after`` ends the run
    early after that many generations in this call (used to test resume).
    """
    out = Path(out_dir or config.out)
    out.mkdir(parents=True, exist_ok=True)
    arch = condition_arch(config)
    dim = genotype_length(config.condition, arch)
    ckpt_path = out / "checkpoint.json"
    es, elapsed = None, 0.0
    if resume and ckpt_path.exists():
        ckpt = json.loads(ckpt_path.read_text())
        if ckpt["config"] == config.to_dict():
            es = CMAES.from_state_dict(ckpt["es"])
            elapsed = ckpt.get("wall_clock", 0.0)
            log.info("resuming from generation %d", es.generation)
    if es is None:
        es = CMAES(dim, popsize=config.popsize, sigma0=config.sigma0,
                   init_range=tuple(config.init_range), seed=_cmaes_seed(config))
    config.save(out / "config.yaml")
    start = time.perf_counter()
    pool = make_pool(config.parallel)
    done_here = 0
    try:
        while es.generation < config.generations:
            if stop_after is not None and done_here >= stop_after:
                break
            xs = es.ask()
            fits, _ = evaluate_population(config, xs, es.generation, pool)
            es.tell(xs, fits)
            done_here += 1
            row = es.history[-1]
            log.info("gen %d mean %.4f max %.4f best %.4f", row["generation"], row["mean"],
                     row["max"], row["best_so_far"])
            wall = elapsed + time.perf_counter() - start
            ckpt_path.write_text(json.dumps({"config": config.to_dict(), "es": es.state_dict(),
                                             "wall_clock": wall}))
            write_learning_curve(out / "learning_curve.csv", es.history)
    finally:
        if pool is not None:
            pool.shutdown()
    report = RunReport(condition=config.condition, seed=config.seed, genotype_dim=dim,
                       generations=list(es.history),
                       best_genotype=[] if es.best_x is None else es.best_x.tolist(),
                       best_fitness=es.best_f,
                       wall_clock=elapsed + time.perf_counter() - start)
    report.to_json(out / "run_report.json")
    return report


@dataclass
class RetestSummary:
    fitnesses: list
    mean: float
    std: float
    swarm_size: int
    arena: str

    def as_dict(self):
        return asdict(self)


def retest(genotype, config, repetitions=None, swarm_size=None, arena=None, out_dir=None,
           save_trajectories=None):
    """Independent fresh-seed trials of one genotype; returns (summary, logs)."""
    genotype = np.asarray(genotype, dtype=np.float64)
    expected = genotype_length(config.condition, condition_arch(config))
    if genotype.shape != (expected,):
        raise ValueError(f"{config.condition} genotype must have length {expected}, "
                         f"got {genotype.shape}")
    reps = repetitions or config.retest["repetitions"]
    settings = trial_settings(config, swarm_size=swarm_size or config.swarm_size, arena=arena)
    n_save = config.retest["save_trajectories"] if save_trajectories is None else save_trajectories
    fits, logs = [], []
    for k in range(reps):
        rec = out_dir is not None and k < n_save
        tlog = run_trial(config.condition, genotype, config.seed,
                         key=("retest", settings["field"].kind, settings["n_robots"], k),
                         record_poses=rec, **settings)
        fits.append(metrics.fitness_trial(tlog))
        logs.append(tlog)
        if rec:
            _write_trajectory(Path(out_dir) / f"trial_{k}.csv", tlog, settings["field"])
    summary = RetestSummary(fits, float(np.mean(fits)), float(np.std(fits)),
                            settings["n_robots"], settings["field"].kind)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        metrics.write_series_csv(out / "retest_fitness.csv", ["trial", "fitness"],
                                 list(range(reps)), fits)
        (out / "retest_summary.json").write_text(json.dumps(summary.as_dict(), indent=1))
    return summary, logs


def _write_trajectory(path, tlog, fld):
    path.parent.mkdir(parents=True, exist_ok=True)
    poses = tlog.poses
    times = np.arange(poses.shape[0]) * tlog.dt
    light = np.stack([fld.sample(poses[k, :, 0], poses[k, :, 1], t=times[k])
                      for k in range(poses.shape[0])])
    write_trajectory_csv(path, poses, light, dt=tlog.dt)


def scale(genotype, config, out_dir=None):
    """Retest summaries keyed by swarm size."""
    results = {}
    for n in config.retest["swarm_sizes"]:
        sub = Path(out_dir) / f"size_{n}" if out_dir else None
        results[n], _ = retest(genotype, config, swarm_size=int(n), out_dir=sub)
    _write_summary(out_dir, "scale_summary.json", results)
    return results


def flex(genotype, config, out_dir=None):
    """Retest summaries keyed by arena kind."""
    results = {}
    for arena in config.retest["arenas"]:
        sub = Path(out_dir) / f"arena_{arena}" if out_dir else None
        results[arena], _ = retest(genotype, config, arena=arena, out_dir=sub)
    _write_summary(out_dir, "flex_summary.json", results)
    return results


def _write_summary(out_dir, name, results):
    if out_dir is None:
        return
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    payload = {str(k): {"mean": v.mean, "std": v.std, "n": len(v.fitnesses)}
               for k, v in results.items()}
    (Path(out_dir) / name).write_text(json.dumps(payload, indent=1))


@dataclass
class PerturbResult:
    static: object
    dynamic: object
    snapshot_times: list
    autocorrelation: dict
    weight_std: dict
    histograms: dict
    bin_edges: np.ndarray


def perturb_experiment(genotype, config, out_dir=None, key=0):
    """Paired static/dynamic deployments of a Hebbian genotype from the same seeds.

    In the dynamic run the light peak jumps to ``perturb.shifted_centre`` at
    ``perturb.switch_time``. Every step's weights are logged for the
    autocorrelation and heterogeneity curves; histograms are taken every
    ``perturb.histogram_interval`` seconds on shared bin edges.
    """
    if config.condition not in ("hebbian", "hebbian_single"):
        raise ValueError("the perturbation protocol needs a Hebbian genotype")
    p = config.perturb
    settings = trial_settings(config, swarm_size=config.swarm_size, seconds=p["seconds"])
    settings["field"] = make_field("circular")
    dyn_field = make_field("shifted-circular", shifted_centre=tuple(p["shifted_centre"]),
                           switch_time=float(p["switch_time"]))
    logs = {}
    for name, fld in (("static", settings["field"]), ("dynamic", dyn_field)):
        logs[name] = run_trial(config.condition, genotype, config.seed, key=("perturb", key),
                               record_poses=True, weight_every=1, **{**settings, "field": fld})
    interval = float(p["histogram_interval"])
    times = [k * interval for k in range(int(p["seconds"] // interval) + 1)]
    snaps = {name: [lg.weights_at(t) for t in times] for name, lg in logs.items()}
    edges = metrics.histogram_edges([s for v in snaps.values() for s in v],
                                    int(p["histogram_bins"]))
    hists = {name: [metrics.weight_histogram(s, edges)[1] for s in v] for name, v in snaps.items()}
    acf = {name: metrics.mean_autocorrelation(lg.weights) for name, lg in logs.items()}
    std = {name: metrics.mean_weight_std_series(lg.weights) for name, lg in logs.items()}
    result = PerturbResult(logs["static"], logs["dynamic"], times, acf, std, hists, edges)
    if out_dir is not None:
        _write_perturb(Path(out_dir), result, {"static": settings["field"], "dynamic": dyn_field})
    return result


def _write_perturb(out, result, fields_):
    out.mkdir(parents=True, exist_ok=True)
    for k, name in enumerate(("static", "dynamic")):
        tlog = getattr(result, name)
        dt = tlog.dt
        metrics.write_series_csv(out / f"light_{name}.csv", ["t", "light"],
                                 np.arange(tlog.n_steps) * dt, tlog.light)
        metrics.write_series_csv(out / f"autocorrelation_{name}.csv", ["tau", "c_bar"],
                                 tlog.weight_steps * dt, result.autocorrelation[name])
        metrics.write_series_csv(out / f"weight_std_{name}.csv", ["t", "std"],
                                 tlog.weight_steps * dt, result.weight_std[name])
        for t, counts in zip(result.snapshot_times, result.histograms[name]):
            metrics.write_histogram_csv(out / f"hist_{name}_t{int(t)}.csv", result.bin_edges,
                                        counts)
        _write_trajectory(out / f"trial_{name}.csv", tlog, fields_[name])
        _write_weight_snapshots(out / f"weights_{name}.csv", tlog, result.snapshot_times)


def _write_weight_snapshots(path, tlog, times):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "robot_id", "weight_index", "value"])
        for t in times:
            snap = tlog.weights_at(t)
            for r in range(snap.shape[0]):
                for w, v in enumerate(snap[r]):
                    writer.writerow([t, r, w, repr(float(v))])


def arch_grid(config, out_dir=None):
    """Evolve the Baseline at every (depth, width) cell at a reduced budget."""
    if config.condition != "baseline":
        raise ValueError("the architecture grid evolves the baseline condition")
    g = config.arch_grid
    skip = {tuple(c) for c in g["skip"]}
    cells = {}
    for depth in g["depths"]:
        for width in g["widths"]:
            if (depth, width) in skip:
                continue
            arch = Architecture.grid(depth, width)
            cell_cfg = ExperimentConfig.from_dict(
                {"layer_sizes": list(arch.layer_sizes), "generations": g["generations"],
                 "popsize": g["popsize"]}, base=config)
            sub = Path(out_dir or config.out) / f"depth{depth}_width{width}"
            report = evolve(cell_cfg, sub)
            cells[(depth, width)] = report
    if out_dir is not None:
        payload = [{"depth": d, "width": w, "genotype_dim": r.genotype_dim,
                    "best_fitness": r.best_fitness} for (d, w), r in cells.items()]
        (Path(out_dir) / "arch_grid.json").write_text(json.dumps(payload, indent=1))
    return cells
