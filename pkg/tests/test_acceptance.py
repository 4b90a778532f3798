"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from hebbswarm.cmaes import CMAES
from hebbswarm.controllers import DEFAULT_ARCH, BaselineAController, make_variant
from hebbswarm.experiments import cli
from hebbswarm.experiments.config import ExperimentConfig, profile_config
from hebbswarm.experiments.protocols import evolve, perturb_experiment
from hebbswarm.metrics import (fitness_trial, mean_autocorrelation, mean_weight_std,
                               mean_weight_std_series)
from hebbswarm.plastic_net import (ActivationTrace, RuleSet, WeightState, hebbian_update,
                                   init_weights)
from hebbswarm.swarm_sim import (DT, MAX_SPEED, NoiseModel, RobotPose, World, make_field,
                                 sense, spawn_swarm, step_kinematics)
from hebbswarm.trial import run_trial


def scalar_hebbian_oracle(values, abcd, mu, layers):
    """Plain loops over (layer, post j, pre i) in storage order."""
    out = list(values)
    k = 0
    for layer in range(len(layers) - 1):
        pre, post = layers[layer], layers[layer + 1]
        for j in range(len(post)):
            for i in range(len(pre)):
                a, b, c, d = abcd[k]
                ni, nj = pre[i], post[j]
                out[k] = out[k] + mu * (a * ni * nj + b * ni + c * nj + d)
                k += 1
    return out


def test_criterion_1_hebbian_update_fidelity(verdict):
    rng = np.random.default_rng(1)
    cases = []
    for _ in range(1000):
        net = WeightState(DEFAULT_ARCH, rng.uniform(-3, 3, DEFAULT_ARCH.n_weights))
        rules = RuleSet(DEFAULT_ARCH, rng.uniform(-5, 5, (DEFAULT_ARCH.n_weights, 4)))
        trace = ActivationTrace([rng.uniform(-1, 1, n) for n in DEFAULT_ARCH.layer_sizes])
        cases.append((net, rules, trace))
    start = time.perf_counter()
    updated = [hebbian_update(*c) for c in cases]
    elapsed = time.perf_counter() - start
    err = max(np.max(np.abs(u.values - scalar_hebbian_oracle(
        c[0].values.tolist(), c[1].abcd.tolist(), c[1].learning_rate,
        [l.tolist() for l in c[2].layers]))) for u, c in zip(updated, cases))
    ok = err <= 1e-12 and elapsed < 1.0
    verdict(1, "ABCD update matches scalar oracle", ok, f"max err {err:.2e}, {elapsed:.3f} s")
    assert ok


def test_criterion_2_zero_rule_and_homogeneity(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    zero = run_trial("hebbian", np.zeros(720), 2, key=("zero",), n_robots=20, seconds=600,
                     weight_every=1)
    frozen = bool(np.all(zero.weights == zero.weights[0]))

    g = rng.uniform(-1, 1, 720)
    twin = make_variant("hebbian", g, 2, rng, shared_init=True)
    same = True
    for _ in range(12000):
        s = rng.uniform(-1, 1, 9)
        same &= bool(np.array_equal(twin.act(0, s), twin.act(1, s)))
    w = twin.robot_weights()
    same &= bool(np.array_equal(w[0], w[1]))

    homo = run_trial("baseline", rng.uniform(-1, 1, 180), 2, key=("homo",), n_robots=20,
                     seconds=600, weight_every=1)
    s_bar = mean_weight_std_series(homo.weights)
    flat = bool(np.all(s_bar == 0.0))
    elapsed = time.perf_counter() - start
    ok = frozen and same and flat and elapsed < 30
    verdict(2, "zero rules freeze weights, twins stay identical, homogeneous s_bar = 0", ok,
            f"frozen={frozen}, twins={same}, s_bar max={s_bar.max():.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_fitness_bounds(verdict):
    start = time.perf_counter()
    top = fitness_trial(np.full(12000, 255.0))
    bottom = fitness_trial(np.zeros(12000))
    rng = np.random.default_rng(3)
    fits = np.array([fitness_trial(rng.uniform(0, 255, rng.integers(1, 2000)))
                     for _ in range(10_000)])
    elapsed = time.perf_counter() - start
    ok = (top == 1.0 and bottom == 0.0 and fits.min() >= 0.0 and fits.max() <= 1.0
          and elapsed < 5)
    verdict(3, "fitness extremes exact and random logs bounded", ok,
            f"f(255)={top}, f(0)={bottom}, range [{fits.min():.3f}, {fits.max():.3f}], "
            f"{elapsed:.2f} s")
    assert ok


def test_criterion_4_metric_oracles(verdict):
    rng = np.random.default_rng(4)
    w = rng.normal(size=(50, 5, 10))
    start = time.perf_counter()
    acf = mean_autocorrelation(w)
    std = mean_weight_std_series(w)
    elapsed = time.perf_counter() - start
    acf_ref = np.zeros(50)
    for tau in range(50):
        total = 0.0
        for a in range(5):
            for k in range(10):
                for t in range(50 - tau):
                    total += w[t + tau, a, k] * w[t, a, k]
        acf_ref[tau] = total / 50
    std_ref = np.zeros(50)
    for t in range(50):
        acc = 0.0
        for k in range(10):
            m = sum(w[t, a, k] for a in range(5)) / 5
            acc += math.sqrt(sum((w[t, a, k] - m) ** 2 for a in range(5)) / 5)
        std_ref[t] = acc / 10
    e1 = np.max(np.abs(acf - acf_ref))
    e2 = np.max(np.abs(std - std_ref))
    e3 = abs(mean_weight_std(w[10]) - std_ref[10])
    ok = max(e1, e2, e3) <= 1e-10 and elapsed < 5
    verdict(4, "autocorrelation and heterogeneity match double-loop oracles", ok,
            f"errors {e1:.1e} / {e2:.1e}, {elapsed:.3f} s")
    assert ok


def test_criterion_5_cmaes_oracle(verdict):
    start = time.perf_counter()
    sphere = [CMAES(10, popsize=30, seed=s).optimize(lambda x: -float(x @ x), 300)[1]
              for s in range(5)]

    def rosen(x):
        return -float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)

    rosenbrock = [CMAES(2, popsize=30, seed=s).optimize(rosen, 1000)[1] for s in range(5)]
    elapsed = time.perf_counter() - start
    n_sphere = sum(f > -1e-6 for f in sphere)
    n_rosen = sum(f > -1e-3 for f in rosenbrock)
    ok = n_sphere == 5 and n_rosen >= 4 and elapsed < 60
    verdict(5, "CMA-ES solves sphere (dim 10) and Rosenbrock (dim 2)", ok,
            f"sphere {n_sphere}/5, rosenbrock {n_rosen}/5, {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_6_desk_scale_learning_signal(verdict, tmp_path):
    start = time.perf_counter()
    gains = []
    for seed in range(5):
        cfg = profile_config("small", seed=seed, condition="hebbian", arena="circular")
        report = evolve(cfg, tmp_path / f"seed{seed}", resume=False)
        gains.append(report.curve("best_so_far")[19] - report.curve("mean")[0])
    elapsed = time.perf_counter() - start
    median = float(np.median(gains))
    ok = median > 0.05 and elapsed < 20 * 60
    verdict(6, "small-profile Hebbian evolution improves fitness", ok,
            f"median gain {median:.4f} over seeds 0-4 "
            f"({', '.join(f'{g:.4f}' for g in gains)}), {elapsed:.0f} s")
    assert ok


def test_criterion_7_baseline_a_frequencies(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    net = init_weights(DEFAULT_ARCH, rng)
    ctrl = BaselineAController(net, net.copy(), 2, rng)
    rates = {}
    for light in (255, 200, 150, 100):
        picks = [ctrl.choose(light, rng.random()) for _ in range(10_000)]
        rates[light] = picks.count(0) / 10_000
    elapsed = time.perf_counter() - start
    target = {255: 1.0, 200: 0.75, 150: 0.5, 100: 0.25}
    worst = max(abs(rates[k] - target[k]) for k in target)
    ok = worst <= 0.02 and elapsed < 5
    verdict(7, "Baseline-A green-network frequencies", ok,
            f"{rates}, worst deviation {worst:.4f}, {elapsed:.2f} s")
    assert ok


def test_criterion_8_perturbation_integrity(verdict, tmp_path):
    start = time.perf_counter()
    cfg = ExperimentConfig(condition="hebbian")
    g = np.random.default_rng(8).uniform(-1, 1, 720)
    res = perturb_experiment(g, cfg, tmp_path)
    elapsed = time.perf_counter() - start
    switch = int(round(300 / DT))
    s, d = res.static, res.dynamic
    before = (np.array_equal(s.light[:switch], d.light[:switch])
              and np.array_equal(s.poses[:switch + 1], d.poses[:switch + 1])
              and np.array_equal(s.weights[:switch + 1], d.weights[:switch + 1]))
    after = not np.array_equal(s.light[switch:], d.light[switch:])
    times = res.snapshot_times == [0, 150, 300, 450, 600]
    files = all((tmp_path / f"hist_{n}_t{t}.csv").exists()
                for n in ("static", "dynamic") for t in (0, 150, 300, 450, 600))
    ok = before and after and times and files and elapsed < 120
    verdict(8, "static and dynamic runs agree before 300 s and diverge after", ok,
            f"identical before={before}, diverge after={after}, "
            f"snapshots {res.snapshot_times}, {elapsed:.1f} s")
    assert ok


def test_criterion_9_simulator_invariants(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    field = make_field("circular")
    world = World.from_poses(field, spawn_swarm(20, field, rng, box=2.0))
    commands = rng.uniform(-1, 1, (100_000, 20, 2))
    worst = 0.0
    for cmd in commands:
        before = world.pos.copy()
        step_kinematics(world, cmd)
        worst = max(worst, float(np.max(np.hypot(*(world.pos - before).T))))
    speed_ok = worst <= MAX_SPEED * DT + 1e-12

    quiet = NoiseModel.none()
    locality_ok = True
    for _ in range(200):
        poses = [RobotPose(0.0, 0.0, rng.uniform(-math.pi, math.pi))]
        poses += [RobotPose(*rng.uniform(-1.4, 1.4, 2), 0.0) for _ in range(4)]
        far = rng.uniform(0, 2 * math.pi)
        poses.append(RobotPose(3 * math.cos(far), 3 * math.sin(far), 0.0))
        moved = poses[:-1] + [RobotPose(3 * math.cos(far + 1), 3 * math.sin(far + 1), 1.0)]
        a = sense(World.from_poses(field, poses), 0, quiet).as_raw()
        b = sense(World.from_poses(field, moved), 0, quiet).as_raw()
        locality_ok &= bool(np.array_equal(a, b))

    bounds_ok = True
    for kind in ("circular", "shifted-circular", "linear", "bimodal", "rosenbrock"):
        f = make_field(kind)
        xy = rng.uniform(-15, 15, (100_000, 2))
        vals = f.sample(xy[:, 0], xy[:, 1], t=rng.uniform(0, 600))
        bounds_ok &= bool(vals.min() >= 0 and vals.max() <= 255)
    elapsed = time.perf_counter() - start
    ok = speed_ok and locality_ok and bounds_ok and elapsed < 30
    verdict(9, "speed bound, sensor locality, field bounds", ok,
            f"max step {worst:.6f} m, locality={locality_ok}, bounds={bounds_ok}, "
            f"{elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_10_parallel_determinism(verdict, tmp_path):
    start = time.perf_counter()
    curves = []
    for workers in (1, 8):
        out = tmp_path / f"p{workers}"
        code = cli.run(["evolve", "--profile", "small", "--seed", "10", "--parallel",
                        str(workers), "--out", str(out), "--no-resume"])
        assert code == 0
        curves.append((out / "learning_curve.csv").read_text())
    elapsed = time.perf_counter() - start
    ok = curves[0] == curves[1] and elapsed < 600
    verdict(10, "learning curves identical with 1 and 8 workers", ok,
            f"{len(curves[0].splitlines()) - 1} generations, {elapsed:.0f} s")
    assert ok
