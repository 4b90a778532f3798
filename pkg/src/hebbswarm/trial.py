"""Run one swarm trial: world + controller + noise stream -> TrialLog."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .controllers import make_variant
from .seeding import trial_streams
from .swarm_sim import NoiseModel, World, make_field, spawn_swarm

CHUNK = 1000
_NEVER = np.iinfo(np.int64).max // 2


@dataclass
class TrialLog:
    """Per-step record of a trial.

    ``light[k]`` is the mean true field value over the swarm when step ``k``
    is sensed (``k = 0 .. T-1``). ``poses`` holds ``T + 1`` states including
    the initial one. ``weights[m]`` is the state after ``weight_steps[m]``
    steps.
    """
    light: np.ndarray
    dt: float
    poses: np.ndarray | None = None
    weights: np.ndarray | None = None
    weight_steps: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self):
        return self.light.shape[0]

    def weights_at(self, seconds):
        step = int(round(seconds / self.dt))
        idx = np.searchsorted(self.weight_steps, step)
        if idx >= len(self.weight_steps) or self.weight_steps[idx] != step:
            raise KeyError(f"no weight snapshot at t={seconds} s")
        return self.weights[idx]


def _switch_step(world):
    st = world.field.switch_time
    if math.isinf(st):
        return _NEVER
    return int(math.ceil(st / world.dt - 1e-9))


def simulate(world, controller, n_steps, noise, rng, record_poses=False, weight_every=None,
             chunk=CHUNK):
    """Advance ``world`` and ``controller`` by ``n_steps`` with the fused loop.

    Noise is drawn from ``rng`` in fixed-size chunks, in the same order for
    every controller kind, so runs that differ only in controller or field
    see identical noise.
    """
    if controller.n_robots != world.n_robots:
        raise ValueError("controller and world disagree on the swarm size")
    n = world.n_robots
    light = np.zeros(n_steps)
    poses = np.zeros((n_steps + 1, n, 3)) if record_poses else np.zeros((1, 1, 3))
    if record_poses:
        poses[0, :, :2] = world.pos
        poses[0, :, 2] = world.heading
    every = int(weight_every) if weight_every else 1
    if weight_every:
        wlog = np.zeros((n_steps // every + 1, n, controller.arch.n_weights))
        wlog[0] = controller.robot_weights()
    else:
        wlog = np.zeros((1, 1, 1))
    kind_a, params_a = world.field.codes(False)
    kind_b, params_b = world.field.codes(True)
    phys = world.phys_array(noise)
    thresholds = getattr(controller, "thresholds", np.zeros(1))
    probs = getattr(controller, "probs", np.zeros(2))
    done = 0
    while done < n_steps:
        s = min(chunk, n_steps - done)
        light_n, theta_n, dist_n, drop = noise.draw(rng, (s, n))
        switch_u = rng.random((s, n))
        _kernels.run_chunk(
            world.t, done, s, world.pos, world.heading,
            controller.mode, controller.weights, controller.bank, controller.assign,
            controller.rules, controller.learning_rate, controller.plastic, controller.sizes,
            controller.recurrent, controller.prev_out, controller.acts,
            kind_a, params_a, kind_b, params_b, _switch_step(world),
            light_n, theta_n, dist_n, drop, switch_u,
            phys, thresholds, probs, controller.switch_every,
            light, poses, record_poses, wlog, every, bool(weight_every))
        world.t += s
        done += s
    log = TrialLog(light=light, dt=world.dt, poses=poses if record_poses else None)
    if weight_every:
        log.weights = wlog
        log.weight_steps = np.arange(wlog.shape[0]) * every
    return log


def run_trial(kind, genotype, master_seed, key=(), n_robots=20, seconds=600.0, field=None,
              noise=None, arch=None, r_spawn=12.0, collisions=True, switch_every=1,
              record_poses=False, weight_every=None, world_kwargs=None):
    """Spawn a swarm, build the controller and simulate a full trial.

    ``(master_seed, key)`` selects the trial's spawn, init and noise streams.
    """
    field = field or make_field("circular")
    noise = NoiseModel() if noise is None else noise
    streams = trial_streams(master_seed, *key)
    poses = spawn_swarm(n_robots, field, streams["spawn"], r_spawn=r_spawn)
    world = World.from_poses(field, poses, rng=streams["noise"], collisions=collisions,
                             **(world_kwargs or {}))
    controller = make_variant(kind, genotype, n_robots, streams["init"], arch=arch,
                              switch_every=switch_every)
    n_steps = int(round(seconds / world.dt))
    log = simulate(world, controller, n_steps, noise, streams["noise"],
                   record_poses=record_poses, weight_every=weight_every)
    log.meta = {"seed": int(master_seed), "key": [str(k) for k in key], "kind": kind,
                "field": field.kind, "swarm_size": n_robots, "seconds": seconds}
    return log
